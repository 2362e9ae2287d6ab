#include "varker/gamma.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace varker {

namespace {

// Lanczos coefficients for g = 7, n = 9 (Godfrey's set).
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeff = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

}  // namespace

double gamma_fn(double x) {
  constexpr double pi = std::numbers::pi;
  if (x < 0.5) return pi / (std::sin(pi * x) * gamma_fn(1.0 - x));
  x -= 1.0;
  double sum = kLanczosCoeff[0];
  for (size_t i = 1; i < kLanczosCoeff.size(); ++i) sum += kLanczosCoeff[i] / (x + static_cast<double>(i));
  const double t = x + kLanczosG + 0.5;
  return std::sqrt(2.0 * pi) * std::pow(t, x + 0.5) * std::exp(-t) * sum;
}

}  // namespace varker
