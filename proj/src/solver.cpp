#include "varker/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <sstream>

namespace varker {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::line_search_failed: return "line_search_failed";
  }
  return {};
}

SampledPath initial_path(const Problem& problem, const SolveOptions& options) {
  const Grid& grid = problem.grid();
  const int n = grid.n();
  const int d = problem.dim();
  const auto& c = problem.constraints();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, d);
  if (c.left && c.right) {
    for (int i = 0; i < n; ++i) {
      const double s = static_cast<double>(i) / (n - 1);
      u.row(i) = ((1.0 - s) * *c.left + s * *c.right).transpose();
    }
  } else if (c.left) {
    u.rowwise() = c.left->transpose();
  } else if (c.right) {
    u.rowwise() = c.right->transpose();
  }
  if (c.left) u.row(0) = c.left->transpose();
  if (c.right) u.row(n - 1) = c.right->transpose();
  if (options.perturbation != 0.0) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      const bool fixed = (i == 0 && c.left) || (i == n - 1 && c.right);
      for (int k = 0; k < d; ++k) {
        const double r = unit(rng);
        if (!fixed) u(i, k) += options.perturbation * r;
      }
    }
  }
  return SampledPath(grid, std::move(u));
}

namespace {

constexpr int kStallLimit = 50;

struct Point {
  Eigen::MatrixXd x;
  double f = 0.0;
  Eigen::MatrixXd g;  // projected
};

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a.cwiseProduct(b).sum(); }

class Objective {
 public:
  explicit Objective(const Problem& problem) : problem_(problem) {}

  // False when the objective is undefined or non-finite at x.
  bool eval(Point& pt) const {
    try {
      Evaluation e = evaluate_with_gradient(problem_, pt.x);
      if (!std::isfinite(e.value) || !e.gradient.allFinite()) return false;
      pt.f = e.value;
      pt.g = std::move(e.gradient);
    } catch (const DomainError&) {
      return false;
    }
    if (problem_.constraints().left) pt.g.row(0).setZero();
    if (problem_.constraints().right) pt.g.row(pt.g.rows() - 1).setZero();
    return true;
  }

 private:
  const Problem& problem_;
};

struct Pair {
  Eigen::MatrixXd s, y;
  double rho;
};

// Tridiagonal W^{1,2} Gram matrix on the node values (lumped mass plus stiffness); fixed nodes
// get identity rows. Applying its inverse removes the O(n^2) conditioning of the discrete problem.
class H1Preconditioner {
 public:
  H1Preconditioner(const Problem& problem) {
    const Grid& grid = problem.grid();
    const int n = grid.n();
    const double h = grid.h();
    diag_ = grid.weight_vector();
    off_ = Eigen::VectorXd::Constant(n - 1, -1.0 / h);
    for (int c = 0; c < n - 1; ++c) {
      diag_(c) += 1.0 / h;
      diag_(c + 1) += 1.0 / h;
    }
    if (problem.constraints().left) {
      diag_(0) = 1.0;
      off_(0) = 0.0;
    }
    if (problem.constraints().right) {
      diag_(n - 1) = 1.0;
      off_(n - 2) = 0.0;
    }
  }

  // Thomas algorithm, column by column.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    const Eigen::Index n = diag_.size();
    Eigen::MatrixXd x = rhs;
    Eigen::VectorXd c(n);
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      double denom = diag_(0);
      c(0) = n > 1 ? off_(0) / denom : 0.0;
      x(0, k) /= denom;
      for (Eigen::Index i = 1; i < n; ++i) {
        denom = diag_(i) - off_(i - 1) * c(i - 1);
        if (i + 1 < n) c(i) = off_(i) / denom;
        x(i, k) = (x(i, k) - off_(i - 1) * x(i - 1, k)) / denom;
      }
      for (Eigen::Index i = n - 1; i-- > 0;) x(i, k) -= c(i) * x(i + 1, k);
    }
    return x;
  }

 private:
  Eigen::VectorXd diag_;
  Eigen::VectorXd off_;
};

Eigen::MatrixXd two_loop(const std::deque<Pair>& pairs, const Eigen::MatrixXd& g, const H1Preconditioner* pre) {
  Eigen::MatrixXd q = g;
  std::vector<double> alpha(pairs.size());
  for (size_t k = pairs.size(); k-- > 0;) {
    alpha[k] = pairs[k].rho * inner(pairs[k].s, q);
    q -= alpha[k] * pairs[k].y;
  }
  if (pre) {
    q = pre->solve(q);
    if (!pairs.empty()) {
      const Pair& last = pairs.back();
      q *= inner(last.s, last.y) / inner(last.y, pre->solve(last.y));
    }
  } else if (!pairs.empty()) {
    const Pair& last = pairs.back();
    q *= inner(last.s, last.y) / inner(last.y, last.y);
  }
  for (size_t k = 0; k < pairs.size(); ++k) {
    const double beta = pairs[k].rho * inner(pairs[k].y, q);
    q += (alpha[k] - beta) * pairs[k].s;
  }
  return -q;
}

}  // namespace

SolveReport solve(const Problem& problem, const SolveOptions& options, const std::optional<SampledPath>& u_init) {
  if (options.max_iters < 1) throw InputError("solver: max_iters must be >= 1");
  if (!(options.grad_tol > 0.0)) throw InputError("solver: grad_tol must be > 0");
  if (options.memory < 0) throw InputError("solver: memory must be >= 0");
  const SampledPath start = u_init ? *u_init : initial_path(problem, options);
  if (!start.grid().same_as(problem.grid()) || start.dim() != problem.dim()) {
    throw InputError("solver: initial path does not match the problem grid");
  }
  if (!problem.constraints().satisfied_by(start)) throw InputError("solver: initial path violates the constraints");

  SolveReport report{start, {}, {}, {}, SolveStatus::max_iters, 0, {}, {}};
  const Objective objective(problem);
  const double p = problem.p();
  auto record = [&](const Point& pt) {
    report.objective_trace.push_back(pt.f);
    report.grad_norm_trace.push_back(max_abs(pt.g));
    report.sobolev_norm_trace.push_back(w1p_norm(SampledPath(problem.grid(), pt.x), p));
  };
  auto finish = [&](const Point& pt, SolveStatus status, std::string message) {
    report.u_star = SampledPath(problem.grid(), pt.x);
    report.status = status;
    report.message = std::move(message);
    if (status == SolveStatus::converged) {
      report.optimality = options.convexity_certified ? "global minimizer (convexity certified)" : "stationary point";
    }
    return report;
  };

  Point cur;
  cur.x = start.values();
  if (!objective.eval(cur)) return finish(cur, SolveStatus::diverged, "objective not finite at the initial path");
  record(cur);

  std::optional<H1Preconditioner> pre;
  if (options.preconditioned) pre.emplace(problem);
  std::deque<Pair> pairs;
  int stalled = 0;
  for (int iter = 0;; ++iter) {
    report.iterations = iter;
    const double gnorm = max_abs(cur.g);
    if (gnorm <= options.grad_tol) return finish(cur, SolveStatus::converged, "projected gradient below tolerance");
    if (iter == options.max_iters) return finish(cur, SolveStatus::max_iters, "iteration limit reached");

    Eigen::MatrixXd dir = two_loop(pairs, cur.g, pre ? &*pre : nullptr);
    double slope = inner(cur.g, dir);
    if (!(slope < 0.0)) {
      pairs.clear();
      dir = two_loop(pairs, cur.g, pre ? &*pre : nullptr);
      slope = inner(cur.g, dir);
    }

    // Backtracking. A step that leaves the objective unchanged up to a few ulps but flattens the slope
    // along dir is also taken; near the optimum Armijo decreases fall below the objective's ulp.
    double step = options.initial_step;
    Point trial;
    bool accepted = false;
    bool armijo = false;
    for (int k = 0; k <= options.max_shrinks; ++k, step *= options.shrink) {
      trial.x = cur.x + step * dir;
      if (!objective.eval(trial)) continue;
      if (trial.f <= cur.f + options.armijo_c * step * slope) {
        accepted = armijo = true;
        break;
      }
      const double ulps = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.f));
      if (trial.f <= cur.f + ulps && std::abs(inner(trial.g, dir)) <= 0.9 * std::abs(slope)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << "line search failed after " << options.max_shrinks << " shrinks (gradient max-norm " << gnorm << ")";
      return finish(cur, SolveStatus::line_search_failed, os.str());
    }

    // Without curvature information the unit step has no scale; grow it while descent continues.
    if (armijo && pairs.empty() && step == options.initial_step) {
      for (int k = 0; k < options.max_shrinks; ++k) {
        Point wider;
        wider.x = cur.x + (2.0 * step) * dir;
        if (!objective.eval(wider)) break;
        if (!(wider.f <= cur.f + options.armijo_c * 2.0 * step * slope && wider.f < trial.f)) break;
        step *= 2.0;
        trial = std::move(wider);
        if (std::abs(trial.f) > options.divergence_bound) break;
      }
    }

    if (options.memory > 0) {
      Eigen::MatrixXd s = trial.x - cur.x;
      Eigen::MatrixXd y = trial.g - cur.g;
      const double sy = inner(s, y);
      if (sy > 1e-12 * std::sqrt(inner(s, s) * inner(y, y)) && sy > 0.0) {
        pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
        if (static_cast<int>(pairs.size()) > options.memory) pairs.pop_front();
      }
    }
    stalled = (trial.f < cur.f || max_abs(trial.g) < gnorm) ? 0 : stalled + 1;
    cur = std::move(trial);
    record(cur);
    if (stalled == kStallLimit) {
      report.iterations = iter + 1;
      std::ostringstream os;
      os << "no progress in " << kStallLimit << " iterations (gradient max-norm " << max_abs(cur.g) << ")";
      return finish(cur, SolveStatus::line_search_failed, os.str());
    }
    if (std::abs(cur.f) > options.divergence_bound || max_abs(cur.x) > options.divergence_bound) {
      report.iterations = iter + 1;
      return finish(cur, SolveStatus::diverged, "objective or path norm exceeded the divergence bound");
    }
  }
}

CoercivityAssessment monitor_coercivity(const SolveReport& report, double p, double growth_limit) {
  CoercivityAssessment a;
  const auto& trace = report.sobolev_norm_trace;
  std::ostringstream os;
  if (trace.empty()) {
    a.message = "no iterates recorded";
    return a;
  }
  const double first = trace.front();
  const double peak = *std::max_element(trace.begin(), trace.end());
  a.growth = first > 0.0 ? peak / first : (peak > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  const bool finite = std::all_of(trace.begin(), trace.end(), [](double v) { return std::isfinite(v); });
  if (report.status == SolveStatus::diverged || !finite) {
    a.possible_noncoercivity = true;
    os << "possible non-coercivity: run diverged with W^{1," << p << "} norm " << trace.back();
  } else if (a.growth > growth_limit) {
    a.possible_noncoercivity = true;
    os << "possible non-coercivity: W^{1," << p << "} norm grew by a factor " << a.growth;
  } else {
    a.bounded = true;
    os << "boundedness consistent with coercivity: W^{1," << p << "} norm stays within " << a.growth
       << " x its initial value";
  }
  a.message = os.str();
  return a;
}

}  // namespace varker
