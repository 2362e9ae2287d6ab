#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varker/expression.hpp"

namespace varker {

using Parameters = std::map<std::string, std::vector<double>>;

/// L(x1, x2, x3, x4, t) with x_i in R^d. Packed input layout is [x1 x2 x3 x4 t] (4d + 1 slots).
class LagrangianExpr {
 public:
  LagrangianExpr(std::string source, int dim, Parameters parameters = {});

  const std::string& source() const { return expr_.source(); }
  int dim() const { return dim_; }
  const Parameters& parameters() const { return parameters_; }
  const Expression& expression() const { return expr_; }
  /// Symbols of L: x1..x4 (width d), t, and the parameters. Used for certificate coefficients.
  const SymbolTable& symbols() const { return symbols_; }
  bool depends_on(int slot) const { return expr_.references("x" + std::to_string(slot)); }

  double eval(std::span<const double> packed) const { return expr_.evaluate(packed); }
  /// Value; `partials` receives dL/dx1..dL/dx4 (4d entries).
  double eval_partials(std::span<const double> packed, std::span<double> partials) const {
    return expr_.evaluate_with_gradient(packed, 0, partials);
  }

  double eval(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const Eigen::VectorXd& x3,
              const Eigen::VectorXd& x4, double t) const;
  struct Partials {
    double value = 0.0;
    std::array<Eigen::VectorXd, 4> d;
  };
  Partials partials(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const Eigen::VectorXd& x3,
                    const Eigen::VectorXd& x4, double t) const;

 private:
  std::vector<double> pack(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const Eigen::VectorXd& x3,
                           const Eigen::VectorXd& x4, double t) const;

  int dim_;
  Parameters parameters_;
  SymbolTable symbols_;
  Expression expr_;
};

LagrangianExpr parse_lagrangian(const std::string& source, int dim, const Parameters& parameters = {});

enum class GrowthMode {
  standard,  // P_M: d2 + (q/p) d3 + d4 <= q/M, c(x1, t)
  relaxed1,  // P1_M: (q/p) d3 + d4 <= q/M, c(x1, x2, t)
  relaxed2,  // P2_M: d3 <= p, c(x1, x2, x4, t)
};
std::string to_string(GrowthMode mode);
GrowthMode growth_mode_from_string(const std::string& name);

/// c(...) * |x2|^d2 |x3|^d3 |x4|^d4. The coefficient is an expression over the symbols of L.
struct GrowthTerm {
  std::string coefficient = "1";
  double d2 = 0.0;
  double d3 = 0.0;
  double d4 = 0.0;
};

/// Dominating functions P0 (for |L|) and P1..P4 (for |dL/dx_i|), with memberships
/// P0, P1 in P_1; P2, P4 in P_q'; P3 in P_p'.
struct RegularityCertificate {
  GrowthMode mode = GrowthMode::standard;
  std::array<std::optional<std::vector<GrowthTerm>>, 5> bounds;
};

/// L >= c0 |x3|^p + sum c_k |x1|^d1 |x2|^d2 |x3|^d3 |x4|^d4.
struct CoercivityTerm {
  double coefficient = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double d4 = 0.0;
};
struct CoercivityCertificate {
  GrowthMode mode = GrowthMode::standard;
  double c0 = 0.0;
  std::vector<CoercivityTerm> terms;
};

/// Sampling used by the empirical spot checks.
struct SpotCheckOptions {
  int samples = 1000;
  std::uint64_t seed = 1;
  double a = 0.0;
  double b = 1.0;
};

struct CheckReport {
  bool passed = true;
  /// Violated conditions, one line each.
  std::vector<std::string> failures;
  /// The condition(s) the verdict rests on.
  std::string condition;

  void fail(std::string message) {
    passed = false;
    failures.push_back(std::move(message));
  }
};

CheckReport check_regularity(const LagrangianExpr& lagrangian, const RegularityCertificate& cert, double p,
                             double q, const SpotCheckOptions& spot = {});
CheckReport check_coercivity(const LagrangianExpr& lagrangian, const CoercivityCertificate& cert, double p,
                             double q, const SpotCheckOptions& spot = {});

enum class ConvexityMode { full, in_x2x3x4, in_x3x4 };
std::string to_string(ConvexityMode mode);
ConvexityMode convexity_mode_from_string(const std::string& name);

/// Midpoint test L((y+z)/2) <= (L(y)+L(z))/2 + 1e-10 over random pairs that differ only in the
/// tested block. In full mode every sample also runs the two block tests on the same draw, so a
/// full pass implies block passes for the same seed. A pass is evidence, not proof.
CheckReport check_convexity(const LagrangianExpr& lagrangian, ConvexityMode mode, int samples, double a,
                            double b, std::uint64_t seed = 1);

}  // namespace varker
