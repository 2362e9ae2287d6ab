#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracle.hpp"
#include "varker/grid.hpp"

using namespace varker;

TEST_CASE("make_grid: nodes and trapezoid weights") {
  const Grid g2 = make_grid(0, 1, 2);
  CHECK(g2.node(0) == 0.0);
  CHECK(g2.node(1) == 1.0);
  CHECK(g2.weights()[0] == 0.5);
  CHECK(g2.weights()[1] == 0.5);

  const Grid g3 = make_grid(0, 1, 3);
  CHECK(g3.weights()[0] == 0.25);
  CHECK(g3.weights()[1] == 0.5);
  CHECK(g3.weights()[2] == 0.25);

  const Grid g4 = make_grid(2, 5, 4);
  CHECK(g4.weight_vector().sum() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(g4.node(3) == 5.0);
}

TEST_CASE("make_grid: rejects bad input") {
  CHECK_THROWS_AS(make_grid(1, 1, 5), InputError);
  CHECK_THROWS_AS(make_grid(2, 1, 5), InputError);
  CHECK_THROWS_AS(make_grid(0, 1, 1), InputError);
}

TEST_CASE("grid invariants over random grids") {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = gen.uniform(-5, 5);
    const double b = a + gen.uniform(0.01, 10);
    const int n = gen.integer(2, 400);
    const Grid g(a, b, n);
    CHECK(g.node(0) == a);
    CHECK(g.node(n - 1) == b);
    for (int i = 1; i < n; ++i) REQUIRE(g.node(i) > g.node(i - 1));
    CHECK(std::abs(g.weight_vector().sum() - (b - a)) <= 1e-13 * (b - a) * n);

    // trapezoid is exact on affine functions
    const double c0 = gen.uniform(-3, 3), c1 = gen.uniform(-3, 3);
    double q = 0.0;
    for (int i = 0; i < n; ++i) q += g.weights()[static_cast<size_t>(i)] * (c0 + c1 * g.node(i));
    const double exact = c0 * (b - a) + 0.5 * c1 * (b * b - a * a);
    CHECK(std::abs(q - exact) <= 1e-12 * (1.0 + std::abs(exact)) * n);
  }
}

TEST_CASE("SampledPath: derivative matches values") {
  const Grid g(0, 2, 9);
  const SampledPath u = SampledPath::from_function(g, 2, [](double t, int k) { return k == 0 ? t * t : -t; });
  REQUIRE(u.deriv().rows() == 8);
  for (int c = 0; c < 8; ++c) {
    CHECK(u.deriv()(c, 0) == doctest::Approx(g.node(c) + g.node(c + 1)).epsilon(1e-12));
    CHECK(u.deriv()(c, 1) == doctest::Approx(-1.0));
  }
  CHECK_THROWS_AS(SampledPath(g, Eigen::MatrixXd::Zero(8, 1)), InputError);
}

TEST_CASE("lp_norm examples") {
  const Grid g(0, 1, 129);
  Eigen::MatrixXd one(129, 2);
  one.col(0).setOnes();
  one.col(1).setZero();
  CHECK(lp_norm(g, one, 2.0) == doctest::Approx(1.0).epsilon(1e-14));

  const SampledPath t = SampledPath::from_function(g, 1, [](double s, int) { return s; });
  CHECK(lp_norm(g, t.values(), std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(std::abs(lp_norm(g, t.values(), 2.0) - 1.0 / std::sqrt(3.0)) <= 1e-3);

  CHECK_THROWS_AS(lp_norm(g, one, 1.0), InputError);
  CHECK_THROWS_AS(lp_norm(g, one, 0.5), InputError);
}

TEST_CASE("w1p_norm examples") {
  const Grid g(0, 1, 257);
  const SampledPath zero(g, Eigen::MatrixXd::Zero(257, 1));
  CHECK(w1p_norm(zero, 2.0) == 0.0);

  const SampledPath c(g, Eigen::MatrixXd::Constant(257, 1, 3.0));
  CHECK(w1p_norm(c, 3.0) == doctest::Approx(lp_norm(g, c.values(), 3.0)).epsilon(1e-14));

  const SampledPath t = SampledPath::from_function(g, 1, [](double s, int) { return s; });
  CHECK(std::abs(w1p_norm(t, 2.0) - std::sqrt(1.0 / 3.0 + 1.0)) <= 1e-3);
}

TEST_CASE("lp_norm homogeneity and discrete Hoelder") {
  oracle::Gen gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = gen.integer(2, 200);
    const int d = gen.integer(1, 3);
    const Grid g(0, gen.uniform(0.1, 4), n);
    Eigen::MatrixXd f(n, d), h(n, d);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) {
        f(i, k) = gen.uniform(-2, 2);
        h(i, k) = gen.uniform(-2, 2);
      }
    }
    const double r = gen.uniform(1.05, 6.0);
    const double c = gen.uniform(-5, 5);
    const Eigen::MatrixXd cf = c * f;
    CHECK(lp_norm(g, cf, r) == doctest::Approx(std::abs(c) * lp_norm(g, f, r)).epsilon(1e-12));
    const double rp = r / (r - 1.0);
    CHECK(std::abs(weighted_dot(g, f, h)) <= lp_norm(g, f, r) * lp_norm(g, h, rp) * (1 + 1e-12));
  }
}

TEST_CASE("affine domination of pinned paths") {
  oracle::Gen gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = gen.integer(3, 150);
    const int d = gen.integer(1, 3);
    const double a = gen.uniform(-1, 1);
    const Grid g(a, a + gen.uniform(0.1, 5), n);
    const double p = gen.uniform(1.1, 5);
    Eigen::VectorXd u0(d);
    for (int k = 0; k < d; ++k) u0(k) = gen.uniform(-3, 3);
    Eigen::MatrixXd v(n, d);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) v(i, k) = gen.uniform(-4, 4);
    }
    v.row(0) = u0.transpose();
    const SampledPath u(g, v);
    const DominationConstants c = affine_domination(g, p, u0, gen.uniform(0, 2));
    double sup = 0.0;
    for (int i = 0; i < n; ++i) sup = std::max(sup, v.row(i).norm());
    CHECK(sup <= (c.a0 * lp_norm_cells(g, u.deriv(), p) + c.a1) * (1 + 1e-12));
  }
}

TEST_CASE("ConstraintSet") {
  const Grid g(0, 1, 5);
  ConstraintSet c;
  c.left = Eigen::VectorXd::Constant(1, 2.0);
  CHECK_NOTHROW(c.validate(1));
  CHECK_THROWS_AS(c.validate(2), InputError);
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(5, 1, 2.0);
  CHECK(c.satisfied_by(SampledPath(g, v)));
  v(0, 0) = 2.0 + 1e-15;
  CHECK_FALSE(c.satisfied_by(SampledPath(g, v)));
}

TEST_CASE("cells_to_nodes") {
  Eigen::MatrixXd cells(3, 1);
  cells << 1, 3, 7;
  const Eigen::MatrixXd nodes = cells_to_nodes(cells);
  REQUIRE(nodes.rows() == 4);
  CHECK(nodes(0, 0) == 1.0);
  CHECK(nodes(1, 0) == 2.0);
  CHECK(nodes(2, 0) == 5.0);
  CHECK(nodes(3, 0) == 7.0);
}
