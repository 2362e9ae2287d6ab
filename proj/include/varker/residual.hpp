#pragma once

#include <string>

#include <Eigen/Dense>

#include "varker/functional.hpp"

namespace varker {

/// First-integral check of a candidate path. With Psi = d3L + K*[d4L] on cells and r = d1L + K*[d2L]
/// on nodes (both read off the discrete gradient), Phi(m_c) = Psi_c - w_u(m_c) where w_u is the
/// cumulative trapezoid integral of r up to the cell midpoint m_c. At a critical point Phi is
/// constant up to O(h^2).
struct ResidualReport {
  Grid grid;
  /// (n-1) x d, one row per cell midpoint.
  Eigen::MatrixXd first_integral;
  /// Mean of Phi over the cells (the integration constant).
  Eigen::VectorXd constant;
  /// max_c |Phi_c - C| / (1 + |C|).
  double constancy_defect = 0.0;
  /// n x d, zero rows at the two end nodes.
  Eigen::MatrixXd differential_residual;
};

ResidualReport first_integral_residual(const Problem& problem, const SampledPath& u);

/// d/dt(d3L + K*[d4L]) - d1L - K*[d2L] at interior nodes, from the same discrete quantities as the
/// first integral. Rows 0 and n-1 are zero.
Eigen::MatrixXd differential_residual(const Problem& problem, const SampledPath& u);

struct FractionalResidual {
  /// n x d, zero rows at the two end nodes.
  Eigen::MatrixXd residual;
  /// max over interior nodes of |residual - differential_residual|.
  double agreement = 0.0;
  /// Same, over nodes in [a + L/10, b - L/10]. The fractional derivatives are singular at the
  /// ends, so the two forms only agree to O(h^alpha) next to a and b.
  double interior_agreement = 0.0;
  /// Human-readable form of the equation that was evaluated.
  std::string form;
};

/// Specialised equation for K = I^alpha_{a+} (Riemann-Liouville, lambda = (1, 0)):
///   d/dt d3L - D^{1-alpha}_{b-}[d4L] = d1L + I^alpha_{b-}[d2L],
/// and for K = -J^alpha_{b-} (Hadamard, lambda = (0, -1)):
///   d/dt d3L - D^{1-alpha}_{a+}[d4L] = d1L - J^alpha_{a+}[d2L].
/// Partials are taken at the nodes, K* is assembled directly, and the derivative parts
/// (d/dt d3L and A* = d/dt o K*) use central differences. alpha = 1 uses the exact A*.
/// Throws InputError for other operators.
FractionalResidual fractional_el_form(const Problem& problem, const SampledPath& u);

}  // namespace varker
