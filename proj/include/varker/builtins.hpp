#pragma once

#include <string>
#include <vector>

#include "varker/lagrangian.hpp"

namespace varker {

struct BuiltinOptions {
  int dim = 1;
  double p = 2.0;
  double q = 2.0;
  /// Interval the certificate constants are computed for.
  double a = 0.0;
  double b = 1.0;
  /// transformed_quadratic only: c3(t) = 2t - 1 instead of 1 + t (scaled to [a, b]).
  bool signed_c3 = false;
};

/// Catalog entry: the Lagrangian, hand-derived growth certificates, and the convexity mode the
/// Lagrangian is known to satisfy.
struct Builtin {
  std::string name;
  std::string description;
  LagrangianExpr lagrangian;
  RegularityCertificate regularity;
  CoercivityCertificate coercivity;
  bool convex_full = true;
  ConvexityMode convexity = ConvexityMode::full;
};

/// dirichlet: 0.5 |x3|^2 (p = 2).
/// quadratic: 0.5 (|x1|^2 + |x2|^2 + |x3|^2 + |x4|^2) (p = 2, q >= 2).
/// transformed_quadratic: 0.5 (|x1 + t s1|^2 + |x2|^2 + |c3(t) x3 + s3|^2 + |x4|^2) (p = 2, q >= 2).
/// quasi_linear: |x3|^p / p + sum f_i . x_i (any 1 < p, q < inf).
/// trig_block_convex: c cos(x1) sin(x2) + |x3|^p / p + f x4 (d = 1).
Builtin make_builtin(const std::string& name, const BuiltinOptions& options = {});
std::vector<std::string> builtin_names();

}  // namespace varker
