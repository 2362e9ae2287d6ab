#pragma once

#include <vector>

namespace varker {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached rule with `points` nodes (Newton iteration on P_n, tolerance 1e-15).
const GaussRule& gauss_legendre(int points);

/// Composite Gauss-Legendre over [lo, hi] with `panels` equal panels.
template <class F>
double integrate_gauss(F&& f, double lo, double hi, int panels = 1, int points = 8) {
  const GaussRule& rule = gauss_legendre(points);
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = lo + (k + 0.5) * width;
    const double half = 0.5 * width;
    double s = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += s * half;
  }
  return total;
}

}  // namespace varker
