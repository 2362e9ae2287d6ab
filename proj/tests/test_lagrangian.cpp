#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "varker/builtins.hpp"
#include "varker/lagrangian.hpp"

using namespace varker;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::VectorXd random_vec(oracle::Gen& gen, int d, double r) {
  Eigen::VectorXd v(d);
  for (int k = 0; k < d; ++k) v(k) = gen.uniform(-r, r);
  return v;
}

bool has_failure(const CheckReport& rep, const std::string& fragment) {
  for (const auto& f : rep.failures) {
    if (f.find(fragment) != std::string::npos) return true;
  }
  return false;
}

// Complete certificate for 0.5 |x3|^2.
RegularityCertificate dirichlet_certificate() {
  RegularityCertificate c;
  c.bounds[0] = std::vector<GrowthTerm>{{"0.5", 0, 2, 0}};
  c.bounds[1] = std::vector<GrowthTerm>{{"0", 0, 0, 0}};
  c.bounds[2] = std::vector<GrowthTerm>{{"0", 0, 0, 0}};
  c.bounds[3] = std::vector<GrowthTerm>{{"1", 0, 0, 0}, {"1", 0, 1, 0}};
  c.bounds[4] = std::vector<GrowthTerm>{{"0", 0, 0, 0}};
  return c;
}

}  // namespace

TEST_CASE("parse_lagrangian examples") {
  const LagrangianExpr q = parse_lagrangian("0.5*(norm(x1)^2 + norm(x2)^2 + norm(x3)^2 + norm(x4)^2)", 2);
  const Eigen::VectorXd e1 = vec({1, 0});
  CHECK(q.eval(e1, e1, e1, e1, 0.3) == doctest::Approx(2.0));
  const auto pq = q.partials(vec({1, 2}), vec({3, 4}), vec({5, 6}), vec({7, 8}), 0.0);
  CHECK(pq.d[0].isApprox(vec({1, 2})));
  CHECK(pq.d[1].isApprox(vec({3, 4})));
  CHECK(pq.d[2].isApprox(vec({5, 6})));
  CHECK(pq.d[3].isApprox(vec({7, 8})));

  const LagrangianExpr dir = parse_lagrangian("0.5*norm(x3)^2", 1);
  CHECK(dir.eval(vec({0}), vec({0}), vec({3}), vec({0}), 0) == doctest::Approx(4.5));
  CHECK_FALSE(dir.depends_on(1));
  CHECK(dir.depends_on(3));

  const LagrangianExpr trig = parse_lagrangian("cos(x1)*sin(x2) + 0.5*norm(x3)^2 + dot(f, x4)", 1, {{"f", {0.5}}});
  CHECK(trig.eval(vec({0}), vec({M_PI / 2}), vec({0}), vec({2}), 0) == doctest::Approx(2.0));

  const LagrangianExpr dot = parse_lagrangian("dot(x3, x3)", 2);
  CHECK(dot.eval(vec({0, 0}), vec({0, 0}), vec({3, 4}), vec({0, 0}), 0) == 25.0);

  const LagrangianExpr lin = parse_lagrangian("dot(f, x4)", 2, {{"f", {1, 2}}});
  const auto pl = lin.partials(vec({1, 1}), vec({1, 1}), vec({1, 1}), vec({1, 1}), 0);
  CHECK(pl.d[0].isZero(0));
  CHECK(pl.d[1].isZero(0));
  CHECK(pl.d[2].isZero(0));
  CHECK(pl.d[3].isApprox(vec({1, 2})));
}

TEST_CASE("parse_lagrangian errors") {
  CHECK_THROWS_AS(parse_lagrangian("sin(x1)", 2), ParseError);
  CHECK_NOTHROW(parse_lagrangian("sin(x1)", 1));
  CHECK_THROWS_AS(parse_lagrangian("0.5*norm(x3)^2 +", 1), ParseError);
  CHECK_THROWS_AS(parse_lagrangian("x5", 1), ParseError);
  CHECK_THROWS_AS(parse_lagrangian("x3", 2), InputError);  // vector-valued
  const LagrangianExpr lg = parse_lagrangian("log(norm(x1))", 1);
  CHECK_THROWS_AS(lg.eval(vec({0}), vec({0}), vec({0}), vec({0}), 0), DomainError);
}

TEST_CASE("quasi-linear arithmetic") {
  // p = 2, c = 0, f_i = e1, x_i = e1: 1/2 + 4
  const LagrangianExpr l = parse_lagrangian(
      "norm(x3)^p/p + dot(f, x1) + dot(f, x2) + dot(f, x3) + dot(f, x4)", 2, {{"p", {2}}, {"f", {1, 0}}});
  const Eigen::VectorXd e1 = vec({1, 0});
  CHECK(l.eval(e1, e1, e1, e1, 0) == doctest::Approx(4.5));
}

TEST_CASE("builtin partials agree with central differences") {
  oracle::Gen gen(3);
  for (const auto& name : builtin_names()) {
    for (int d : {1, 2}) {
      if (name == "trig_block_convex" && d == 2) continue;
      BuiltinOptions opts;
      opts.dim = d;
      opts.p = name == "quasi_linear" ? 3.0 : 2.0;
      opts.q = opts.p;
      const Builtin b = make_builtin(name, opts);
      for (int trial = 0; trial < 50; ++trial) {
        std::array<Eigen::VectorXd, 4> x;
        for (auto& xi : x) xi = random_vec(gen, d, 2.0);
        const double t = gen.uniform(0, 1);
        const auto p = b.lagrangian.partials(x[0], x[1], x[2], x[3], t);
        for (int i = 0; i < 4; ++i) {
          for (int k = 0; k < d; ++k) {
            auto hi = x, lo = x;
            hi[static_cast<size_t>(i)](k) += 1e-5;
            lo[static_cast<size_t>(i)](k) -= 1e-5;
            const double fd = (b.lagrangian.eval(hi[0], hi[1], hi[2], hi[3], t) -
                               b.lagrangian.eval(lo[0], lo[1], lo[2], lo[3], t)) /
                              2e-5;
            INFO(name << " slot " << i + 1);
            CHECK(std::abs(fd - p.d[static_cast<size_t>(i)](k)) <= 1e-6 * std::max(1.0, std::abs(fd)));
          }
        }
      }
    }
  }
}

TEST_CASE("regularity: catalog certificates pass") {
  for (const auto& name : builtin_names()) {
    BuiltinOptions opts;
    if (name == "quasi_linear") opts.p = opts.q = 3.0;
    const Builtin b = make_builtin(name, opts);
    const CheckReport rep = check_regularity(b.lagrangian, b.regularity, opts.p, opts.q);
    INFO(name);
    for (const auto& f : rep.failures) INFO(f);
    CHECK(rep.passed);
  }
}

TEST_CASE("regularity: exponent condition violated") {
  const LagrangianExpr l = parse_lagrangian("0.5*norm(x3)^2", 1);
  RegularityCertificate cert = dirichlet_certificate();
  CHECK(check_regularity(l, cert, 2, 2).passed);
  cert.bounds[0] = std::vector<GrowthTerm>{{"1", 1.0, 1.0, 1.0}};  // d2 + d3 + d4 = 3 = 1.5 q
  const CheckReport rep = check_regularity(l, cert, 2, 2);
  CHECK_FALSE(rep.passed);
  CHECK(has_failure(rep, "d2 + (q/p)d3 + d4 <= q/M"));
}

TEST_CASE("regularity: relaxed P2 allows d3 = p") {
  const LagrangianExpr l = parse_lagrangian("0.5*norm(x3)^2", 1);
  RegularityCertificate cert = dirichlet_certificate();
  cert.mode = GrowthMode::relaxed2;
  cert.bounds[3] = std::vector<GrowthTerm>{{"1", 0.0, 0.0, 0.0}, {"1", 0.0, 2.0, 0.0}};
  CHECK(check_regularity(l, cert, 2, 2).passed);
  cert.mode = GrowthMode::standard;
  CHECK_FALSE(check_regularity(l, cert, 2, 2).passed);
}

TEST_CASE("regularity: spot check catches an understated bound") {
  const LagrangianExpr l = parse_lagrangian("0.5*norm(x3)^2", 1);
  RegularityCertificate cert = dirichlet_certificate();
  cert.bounds[0] = std::vector<GrowthTerm>{{"0.1", 0.0, 1.0, 0.0}};
  const CheckReport rep = check_regularity(l, cert, 2, 2);
  CHECK_FALSE(rep.passed);
}

TEST_CASE("regularity: forbidden coefficient dependence") {
  const LagrangianExpr l = parse_lagrangian("0.5*norm(x3)^2", 1);
  RegularityCertificate cert = dirichlet_certificate();
  cert.bounds[0] = std::vector<GrowthTerm>{{"1 + norm(x2)^2", 0.0, 2.0, 0.0}};
  CHECK_FALSE(check_regularity(l, cert, 2, 2).passed);
  cert.mode = GrowthMode::relaxed1;
  cert.bounds[0] = std::vector<GrowthTerm>{{"1 + norm(x2)^2", 0.0, 0.0, 0.0}, {"1", 0.0, 2.0, 0.0}};
  CHECK(check_regularity(l, cert, 2, 2).passed);
}

TEST_CASE("coercivity examples") {
  const Builtin q = make_builtin("quadratic");
  CHECK(check_coercivity(q.lagrangian, q.coercivity, 2, 2).passed);
  CHECK(q.coercivity.c0 == 0.5);

  const LagrangianExpr l = parse_lagrangian("0.5*norm(x3)^2 - 0.1*norm(x1)^2", 1);
  CoercivityCertificate c{GrowthMode::standard, 0.5, {{-0.1, 2, 0, 0, 0}}};
  const CheckReport rep = check_coercivity(l, c, 2, 2);
  CHECK_FALSE(rep.passed);
  CHECK(has_failure(rep, "d1 + d2 + d3 + d4 < p"));
  c.terms[0].d1 = 1.5;
  // exponent arithmetic now holds but |x1|^2 is not below 0.1 |x1|^1.5 everywhere: spot check fails
  CHECK_FALSE(check_coercivity(l, c, 2, 2).passed);

  CoercivityCertificate zero{GrowthMode::standard, 0.0, {}};
  CHECK(has_failure(check_coercivity(l, zero, 2, 2), "c0 > 0"));
}

TEST_CASE("transformed quadratic: coercivity certified only for c3 >= 0") {
  const Builtin pos = make_builtin("transformed_quadratic");
  CHECK(check_regularity(pos.lagrangian, pos.regularity, 2, 2).passed);
  CHECK(check_coercivity(pos.lagrangian, pos.coercivity, 2, 2).passed);
  CHECK(check_convexity(pos.lagrangian, ConvexityMode::full, 2000, 0, 1).passed);

  BuiltinOptions o;
  o.signed_c3 = true;
  const Builtin neg = make_builtin("transformed_quadratic", o);
  CHECK(check_regularity(neg.lagrangian, neg.regularity, 2, 2).passed);
  CHECK_FALSE(check_coercivity(neg.lagrangian, neg.coercivity, 2, 2).passed);
  CHECK(check_convexity(neg.lagrangian, ConvexityMode::full, 2000, 0, 1).passed);
}

TEST_CASE("quasi-linear: regular, coercive and convex across exponents") {
  for (double p : {1.3, 2.0, 3.5}) {
    for (double q : {1.5, 2.0, 4.0}) {
      BuiltinOptions o;
      o.p = p;
      o.q = q;
      const Builtin b = make_builtin("quasi_linear", o);
      INFO("p = " << p << " q = " << q);
      CHECK(check_regularity(b.lagrangian, b.regularity, p, q).passed);
      CHECK(check_coercivity(b.lagrangian, b.coercivity, p, q).passed);
      CHECK(check_convexity(b.lagrangian, ConvexityMode::full, 1000, 0, 1).passed);
    }
  }
}

TEST_CASE("convexity modes") {
  const Builtin q = make_builtin("quadratic");
  CHECK(check_convexity(q.lagrangian, ConvexityMode::full, 2000, 0, 1).passed);

  const Builtin trig = make_builtin("trig_block_convex");
  const CheckReport full = check_convexity(trig.lagrangian, ConvexityMode::full, 2000, 0, 1);
  CHECK_FALSE(full.passed);
  CHECK_FALSE(full.failures.empty());
  CHECK(check_convexity(trig.lagrangian, ConvexityMode::in_x3x4, 2000, 0, 1).passed);
  CHECK_FALSE(trig.convex_full);
  CHECK(trig.convexity == ConvexityMode::in_x3x4);

  const LagrangianExpr l = parse_lagrangian("norm(x3)^2 - norm(x1)^2", 1);
  CHECK_FALSE(check_convexity(l, ConvexityMode::full, 2000, 0, 1).passed);
  CHECK(check_convexity(l, ConvexityMode::in_x2x3x4, 2000, 0, 1).passed);

  const LagrangianExpr p15 = parse_lagrangian("norm(x3)^1.5", 2);
  CHECK(check_convexity(p15, ConvexityMode::full, 2000, 0, 1).passed);
}

TEST_CASE("property: full convexity implies block convexity on the same seeds") {
  const char* sources[] = {"norm(x1 + x3)^2 + exp(x4)", "norm(x2)^1.5 + abs(x1 - x4)", "exp(x1 + x2) + x3^2",
                           "cos(x1) + x3^2", "x3^4 - x2^2", "tanh(x4) + x1^2"};
  for (const char* src : sources) {
    const LagrangianExpr l = parse_lagrangian(src, 1);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      if (check_convexity(l, ConvexityMode::full, 300, 0, 1, seed).passed) {
        INFO(src << " seed " << seed);
        CHECK(check_convexity(l, ConvexityMode::in_x2x3x4, 300, 0, 1, seed).passed);
        CHECK(check_convexity(l, ConvexityMode::in_x3x4, 300, 0, 1, seed).passed);
      }
    }
  }
}

TEST_CASE("growth mode names") {
  CHECK(to_string(GrowthMode::relaxed1) == "P1");
  CHECK(growth_mode_from_string("P2") == GrowthMode::relaxed2);
  CHECK_THROWS_AS(growth_mode_from_string("Q"), InputError);
  CHECK(convexity_mode_from_string("in_x3x4") == ConvexityMode::in_x3x4);
  CHECK_THROWS_AS(make_builtin("nope"), InputError);
}
