#include "varker/builtins.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace varker {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

GrowthTerm term(std::string c, double d2 = 0, double d3 = 0, double d4 = 0) { return {std::move(c), d2, d3, d4}; }

std::vector<double> filled(int dim, double v) { return std::vector<double>(static_cast<size_t>(dim), v); }

void require_p2(const std::string& name, const BuiltinOptions& o) {
  if (o.p != 2.0) throw InputError(name + " requires p = 2");
  if (name != "dirichlet" && o.q < 2.0) throw InputError(name + " requires q >= 2");
}

Builtin dirichlet(const BuiltinOptions& o) {
  require_p2("dirichlet", o);
  Builtin b{"dirichlet", "0.5 |x3|^2", LagrangianExpr("0.5*norm(x3)^2", o.dim), {}, {}, true, ConvexityMode::full};
  b.regularity.bounds = {std::vector<GrowthTerm>{term("0.5", 0, 2)}, std::vector<GrowthTerm>{},
                         std::vector<GrowthTerm>{}, std::vector<GrowthTerm>{term("1", 0, 1)},
                         std::vector<GrowthTerm>{}};
  b.coercivity.c0 = 0.5;
  return b;
}

Builtin quadratic(const BuiltinOptions& o) {
  require_p2("quadratic", o);
  Builtin b{"quadratic", "0.5 (|x1|^2 + |x2|^2 + |x3|^2 + |x4|^2)",
            LagrangianExpr("0.5*(norm(x1)^2 + norm(x2)^2 + norm(x3)^2 + norm(x4)^2)", o.dim), {}, {}, true,
            ConvexityMode::full};
  b.regularity.bounds = {
      std::vector<GrowthTerm>{term("0.5*norm(x1)^2"), term("0.5", 2), term("0.5", 0, 2), term("0.5", 0, 0, 2)},
      std::vector<GrowthTerm>{term("norm(x1)")},
      std::vector<GrowthTerm>{term("1", 1)},
      std::vector<GrowthTerm>{term("1", 0, 1)},
      std::vector<GrowthTerm>{term("1", 0, 0, 1)},
  };
  b.coercivity.c0 = 0.5;
  return b;
}

Builtin transformed_quadratic(const BuiltinOptions& o) {
  require_p2("transformed_quadratic", o);
  const std::string s = "((t - " + num(o.a) + ")/" + num(o.b - o.a) + ")";
  const std::string c3 = o.signed_c3 ? "(2*" + s + " - 1)" : "(1 + " + s + ")";
  // c3 is affine in t: extremes of c3^2 over [a, b] sit at the endpoints or at a zero crossing.
  const double c3a = o.signed_c3 ? -1.0 : 1.0;
  const double c3b = o.signed_c3 ? 1.0 : 2.0;
  const double c3_min_sq = (c3a < 0 && c3b > 0) ? 0.0 : std::min(c3a * c3a, c3b * c3b);
  const double c3_max = std::max(std::abs(c3a), std::abs(c3b));
  Parameters params{{"s1", filled(o.dim, 0.5)}, {"s3", filled(o.dim, 0.25)}};
  const double s3_norm = 0.25 * std::sqrt(static_cast<double>(o.dim));
  Builtin b{"transformed_quadratic", "0.5 (|x1 + t s1|^2 + |x2|^2 + |c3(t) x3 + s3|^2 + |x4|^2)",
            LagrangianExpr("0.5*(norm(x1 + t*s1)^2 + norm(x2)^2 + norm(" + c3 + "*x3 + s3)^2 + norm(x4)^2)", o.dim,
                           params),
            {}, {}, true, ConvexityMode::full};
  b.regularity.bounds = {
      std::vector<GrowthTerm>{term("0.5*norm(x1 + t*s1)^2"), term("0.5", 2), term(c3 + "^2", 0, 2),
                              term("norm(s3)^2"), term("0.5", 0, 0, 2)},
      std::vector<GrowthTerm>{term("norm(x1 + t*s1)")},
      std::vector<GrowthTerm>{term("1", 1)},
      std::vector<GrowthTerm>{term(c3 + "^2", 0, 1), term("abs(" + c3 + ")*norm(s3)")},
      std::vector<GrowthTerm>{term("1", 0, 0, 1)},
  };
  b.coercivity.c0 = 0.5 * c3_min_sq;
  b.coercivity.terms = {{-c3_max * s3_norm, 0, 0, 1, 0}};
  return b;
}

Builtin quasi_linear(const BuiltinOptions& o) {
  Parameters params{{"p", {o.p}},
                    {"f1", filled(o.dim, 0.5)},
                    {"f2", filled(o.dim, -0.25)},
                    {"f3", filled(o.dim, 0.1)},
                    {"f4", filled(o.dim, 0.2)}};
  const double root = std::sqrt(static_cast<double>(o.dim));
  Builtin b{"quasi_linear", "|x3|^p / p + f1.x1 + f2.x2 + f3.x3 + f4.x4",
            LagrangianExpr("norm(x3)^p/p + dot(f1, x1) + dot(f2, x2) + dot(f3, x3) + dot(f4, x4)", o.dim, params),
            {}, {}, true, ConvexityMode::full};
  b.regularity.bounds = {
      std::vector<GrowthTerm>{term("norm(f1)*norm(x1)"), term("norm(f2)", 1), term("1/p", 0, o.p),
                              term("norm(f3)", 0, 1), term("norm(f4)", 0, 0, 1)},
      std::vector<GrowthTerm>{term("norm(f1)")},
      std::vector<GrowthTerm>{term("norm(f2)")},
      std::vector<GrowthTerm>{term("1", 0, o.p - 1), term("norm(f3)")},
      std::vector<GrowthTerm>{term("norm(f4)")},
  };
  b.coercivity.c0 = 1.0 / o.p;
  b.coercivity.terms = {{-0.5 * root, 1, 0, 0, 0},
                        {-0.25 * root, 0, 1, 0, 0},
                        {-0.1 * root, 0, 0, 1, 0},
                        {-0.2 * root, 0, 0, 0, 1}};
  return b;
}

Builtin trig_block_convex(const BuiltinOptions& o) {
  if (o.dim != 1) throw InputError("trig_block_convex is defined for d = 1");
  Parameters params{{"p", {o.p}}, {"c", {1.0}}, {"f", {0.5}}};
  Builtin b{"trig_block_convex", "c cos(x1) sin(x2) + |x3|^p / p + f x4",
            LagrangianExpr("c*cos(x1)*sin(x2) + norm(x3)^p/p + f*x4", 1, params), {}, {}, false,
            ConvexityMode::in_x3x4};
  b.regularity.bounds = {
      std::vector<GrowthTerm>{term("abs(c)"), term("1/p", 0, o.p), term("abs(f)", 0, 0, 1)},
      std::vector<GrowthTerm>{term("abs(c)")},
      std::vector<GrowthTerm>{term("abs(c)")},
      std::vector<GrowthTerm>{term("1", 0, o.p - 1)},
      std::vector<GrowthTerm>{term("abs(f)")},
  };
  b.coercivity.c0 = 1.0 / o.p;
  b.coercivity.terms = {{-1.0, 0, 0, 0, 0}, {-0.5, 0, 0, 0, 1}};
  return b;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"dirichlet", "quadratic", "transformed_quadratic", "quasi_linear", "trig_block_convex"};
}

Builtin make_builtin(const std::string& name, const BuiltinOptions& options) {
  if (name == "dirichlet") return dirichlet(options);
  if (name == "quadratic") return quadratic(options);
  if (name == "transformed_quadratic") return transformed_quadratic(options);
  if (name == "quasi_linear") return quasi_linear(options);
  if (name == "trig_block_convex") return trig_block_convex(options);
  throw InputError("unknown builtin lagrangian '" + name + "'");
}

}  // namespace varker
