#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracle.hpp"
#include "varker/builtins.hpp"
#include "varker/solver.hpp"

using namespace varker;

namespace {

ConstraintSet ends(int d, std::optional<double> left, std::optional<double> right) {
  ConstraintSet c;
  if (left) c.left = Eigen::VectorXd::Constant(d, *left);
  if (right) c.right = Eigen::VectorXd::Constant(d, *right);
  return c;
}

Problem dirichlet(int n) {
  return Problem(Grid(0, 1, n), parse_lagrangian("0.5*norm(x3)^2", 1), KernelSpec::zero(), ends(1, 0, 1), 2, 2);
}

Problem rl_quadratic(int n) {
  return Problem(Grid(0, 1, n), make_builtin("quadratic").lagrangian, KernelSpec::riemann_liouville(0.5),
                 ends(1, 0, 1), 2, 2);
}

}  // namespace

TEST_CASE("dirichlet: straight line") {
  const Problem pr = dirichlet(129);
  SolveOptions o;
  o.perturbation = 0.3;
  o.seed = 5;
  const SolveReport r = solve(pr, o);
  REQUIRE(r.status == SolveStatus::converged);
  double err = 0.0;
  for (int i = 0; i < 129; ++i) err = std::max(err, std::abs(r.u_star.values()(i, 0) - pr.grid().node(i)));
  CHECK(err <= 1e-6);
  CHECK(r.objective_trace.back() == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.optimality == "stationary point");
  o.convexity_certified = true;
  CHECK(solve(pr, o).optimality == "global minimizer (convexity certified)");
}

TEST_CASE("initial path") {
  const Grid g(0, 2, 9);
  const Problem both(g, parse_lagrangian("0.5*norm(x3)^2", 2), KernelSpec::zero(), ends(2, 1, 3), 2, 2);
  const SampledPath u = initial_path(both, {});
  for (int i = 0; i < 9; ++i) CHECK(u.values()(i, 1) == doctest::Approx(1 + g.node(i)));

  const Problem left(g, parse_lagrangian("0.5*norm(x3)^2", 1), KernelSpec::zero(), ends(1, -2, std::nullopt), 2, 2);
  CHECK((initial_path(left, {}).values().array() == -2.0).all());
  const Problem free(g, parse_lagrangian("0.5*norm(x3)^2", 1), KernelSpec::zero(), {}, 2, 2);
  CHECK(initial_path(free, {}).values().isZero());

  SolveOptions o;
  o.perturbation = 0.1;
  o.seed = 8;
  const SampledPath p1 = initial_path(both, o), p2 = initial_path(both, o);
  CHECK(p1.values() == p2.values());
  CHECK(p1.values().row(0) == u.values().row(0));
  CHECK(p1.values().row(8) == u.values().row(8));
  CHECK((p1.values() - u.values()).cwiseAbs().maxCoeff() <= 0.1);
  CHECK((p1.values() - u.values()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("property: descent, feasibility and post-hoc gradient") {
  oracle::Gen gen(17);
  for (const auto& name : builtin_names()) {
    if (name == "trig_block_convex") continue;
    for (int trial = 0; trial < 3; ++trial) {
      const int n = gen.integer(17, 80);
      const double l = gen.uniform(-1, 1), rr = gen.uniform(-1, 1);
      const Problem pr(Grid(0, 1, n), make_builtin(name).lagrangian, KernelSpec::riemann_liouville(gen.uniform(0.3, 0.9)),
                       ends(1, l, rr), 2, 2);
      SolveOptions o;
      o.perturbation = 0.5;
      o.seed = static_cast<std::uint64_t>(gen.integer(1, 1000));
      const SolveReport r = solve(pr, o);
      INFO(name << " n=" << n);
      REQUIRE(r.status == SolveStatus::converged);
      for (size_t k = 1; k < r.objective_trace.size(); ++k) {
        const double prev = r.objective_trace[k - 1];
        CHECK(r.objective_trace[k] <= prev + 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(prev)));
      }
      CHECK(r.u_star.values()(0, 0) == l);
      CHECK(r.u_star.values()(n - 1, 0) == rr);
      CHECK(gradient(pr, r.u_star).cwiseAbs().maxCoeff() <= o.grad_tol);
      CHECK(r.objective_trace.size() == r.grad_norm_trace.size());
      CHECK(r.objective_trace.size() == r.sobolev_norm_trace.size());
    }
  }
}

TEST_CASE("convex problem: different starts reach the same minimizer") {
  const Problem pr = rl_quadratic(65);
  SolveOptions o1, o2;
  o1.perturbation = o2.perturbation = 1.0;
  o1.seed = 1;
  o2.seed = 99;
  const SolveReport r1 = solve(pr, o1), r2 = solve(pr, o2);
  REQUIRE(r1.status == SolveStatus::converged);
  REQUIRE(r2.status == SolveStatus::converged);
  CHECK((r1.u_star.values() - r2.u_star.values()).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("explicit start and plain gradient descent") {
  const Problem pr = dirichlet(33);
  const SampledPath start = SampledPath::from_function(pr.grid(), 1, [](double t, int) { return t + 4 * t * (1 - t); });
  SolveOptions o;
  const SolveReport lb = solve(pr, o, start);
  REQUIRE(lb.status == SolveStatus::converged);
  o.memory = 0;
  o.max_iters = 20000;
  const SolveReport gd = solve(pr, o, start);
  REQUIRE(gd.status == SolveStatus::converged);
  CHECK((gd.u_star.values() - lb.u_star.values()).cwiseAbs().maxCoeff() <= 1e-6);

  o.preconditioned = false;
  o.memory = 10;
  CHECK(solve(pr, o, start).status == SolveStatus::converged);

  const SampledPath infeasible(pr.grid(), Eigen::MatrixXd::Zero(33, 1));
  CHECK_THROWS_AS(solve(pr, {}, infeasible), InputError);
}

TEST_CASE("rl quadratic: refinement") {
  SolveOptions o;
  o.grad_tol = 1e-10;
  const SolveReport coarse = solve(rl_quadratic(129), o);
  const SolveReport fine = solve(rl_quadratic(513), o);
  REQUIRE(coarse.status == SolveStatus::converged);
  REQUIRE(fine.status == SolveStatus::converged);
  double diff = 0.0;
  for (int i = 0; i < 129; ++i) diff = std::max(diff, std::abs(coarse.u_star.values()(i, 0) - fine.u_star.values()(4 * i, 0)));
  CHECK(diff <= 1e-2);
}

TEST_CASE("nonsmooth but coercive integrand stays bounded") {
  const Problem pr(Grid(0, 1, 65), parse_lagrangian("0.5*norm(x3)^2 - norm(x1)", 1), KernelSpec::zero(),
                   ends(1, 0, 1), 2, 2);
  const SolveReport r = solve(pr);
  CHECK(r.status == SolveStatus::converged);
  CHECK(monitor_coercivity(r, 2).bounded);
  // minimiser of u'^2/2 - u with u >= 0 away from 0: u = -t^2/2 + 3t/2
  for (int i = 0; i < 65; ++i) {
    const double t = pr.grid().node(i);
    CHECK(std::abs(r.u_star.values()(i, 0) - (-0.5 * t * t + 1.5 * t)) <= 1e-3);
  }
}

TEST_CASE("noncoercive integrand diverges and is flagged") {
  const Problem pr(Grid(0, 1, 65), parse_lagrangian("-norm(x3)", 1), KernelSpec::zero(), ends(1, 0, std::nullopt), 2,
                   2);
  SolveOptions o;
  o.perturbation = 0.01;
  o.seed = 3;
  const SolveReport r = solve(pr, o);
  CHECK(r.status == SolveStatus::diverged);
  CHECK(r.optimality.empty());
  const CoercivityAssessment m = monitor_coercivity(r, 2);
  CHECK(m.possible_noncoercivity);
  CHECK_FALSE(m.bounded);
}

TEST_CASE("coercive builtins are reported bounded") {
  for (const auto& name : {"quadratic", "quasi_linear", "transformed_quadratic"}) {
    BuiltinOptions bo;
    bo.p = bo.q = std::string(name) == "quasi_linear" ? 3.0 : 2.0;
    const Problem pr(Grid(0, 1, 65), make_builtin(name, bo).lagrangian, KernelSpec::riemann_liouville(0.5),
                     ends(1, 1, std::nullopt), bo.p, bo.q);
    SolveOptions o;
    o.perturbation = 0.2;
    o.seed = 4;
    const SolveReport r = solve(pr, o);
    INFO(name);
    CHECK(r.status == SolveStatus::converged);
    const CoercivityAssessment m = monitor_coercivity(r, bo.p);
    CHECK(m.bounded);
    CHECK_FALSE(m.possible_noncoercivity);
  }
}

TEST_CASE("max_iters is reported") {
  SolveOptions o;
  o.max_iters = 2;
  o.perturbation = 0.5;
  o.seed = 2;
  const SolveReport r = solve(rl_quadratic(65), o);
  CHECK(r.status == SolveStatus::max_iters);
  CHECK(r.iterations == 2);
  CHECK(r.optimality.empty());
}
