#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "varker/functional.hpp"

namespace varker {

struct SolveOptions {
  int max_iters = 5000;
  /// Tolerance on the max-norm of the projected gradient.
  double grad_tol = 1e-8;
  /// Stored quasi-Newton pairs; 0 gives plain (preconditioned) gradient descent.
  int memory = 10;
  /// Use the W^{1,2} Gram matrix of the grid as the initial inverse-Hessian scaling.
  bool preconditioned = true;
  /// Seed and amplitude of the uniform perturbation added to the free nodes of the initial path.
  std::uint64_t seed = 0;
  double perturbation = 0.0;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
  int max_shrinks = 60;
  /// |objective| or max |u| beyond this counts as divergence.
  double divergence_bound = 1e12;
  /// Set when check_convexity(full) passed; only then is a converged result called a global minimizer.
  bool convexity_certified = false;
};

enum class SolveStatus { converged, max_iters, diverged, line_search_failed };
std::string to_string(SolveStatus status);

struct SolveReport {
  SampledPath u_star;
  std::vector<double> objective_trace;
  std::vector<double> grad_norm_trace;
  std::vector<double> sobolev_norm_trace;
  SolveStatus status = SolveStatus::max_iters;
  int iterations = 0;
  /// "global minimizer (convexity certified)", "stationary point" or empty when not converged.
  std::string optimality;
  std::string message;
};

/// Affine interpolant of the boundary data (a constant when one end is fixed, zero when none),
/// plus the seeded perturbation on free nodes.
SampledPath initial_path(const Problem& problem, const SolveOptions& options);

/// Limited-memory BFGS with Armijo backtracking over the free node values. The objective trace is
/// non-increasing up to 8 ulps (flat steps near the optimum). Constrained nodes are
/// never written, so every iterate is feasible bit for bit.
SolveReport solve(const Problem& problem, const SolveOptions& options = {},
                  const std::optional<SampledPath>& u_init = std::nullopt);

struct CoercivityAssessment {
  bool bounded = false;
  bool possible_noncoercivity = false;
  /// max(sobolev_norm_trace) / sobolev_norm_trace[0].
  double growth = 0.0;
  std::string message;
};

/// Bounded Sobolev norms along a decreasing objective are consistent with coercivity; divergence
/// or growth beyond `growth_limit` times the initial norm flags possible non-coercivity.
CoercivityAssessment monitor_coercivity(const SolveReport& report, double p, double growth_limit = 10.0);

}  // namespace varker
