#pragma once

#include <array>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "varker/grid.hpp"
#include "varker/kernel_ops.hpp"
#include "varker/lagrangian.hpp"

namespace varker {

/// Where the integrand is sampled.
///   cell_midpoint: one sample per cell at its midpoint; u and K[u] interpolated there, u' and K[u']
///                  taken on the cell. Weight h.
///   node_average:  one sample per node with trapezoid weights; u' at a node is the average of the
///                  adjacent cells (one-sided at the ends).
enum class IntegrandRule { cell_midpoint, node_average };
std::string to_string(IntegrandRule rule);
IntegrandRule integrand_rule_from_string(const std::string& name);

class Problem {
 public:
  Problem(Grid grid, LagrangianExpr lagrangian, KernelSpec spec, ConstraintSet constraints, double p, double q,
          IntegrandRule rule = IntegrandRule::cell_midpoint);

  const Grid& grid() const { return op_->grid(); }
  const LagrangianExpr& lagrangian() const { return lagrangian_; }
  const DiscreteOperator& op() const { return *op_; }
  const ConstraintSet& constraints() const { return constraints_; }
  double p() const { return p_; }
  double q() const { return q_; }
  int dim() const { return lagrangian_.dim(); }
  IntegrandRule rule() const { return rule_; }

 private:
  LagrangianExpr lagrangian_;
  std::shared_ptr<const DiscreteOperator> op_;
  ConstraintSet constraints_;
  double p_;
  double q_;
  IntegrandRule rule_;
};

/// Arguments of L at the quadrature samples, m x d each.
struct IntegrandSamples {
  std::array<Eigen::MatrixXd, 4> x;
  Eigen::VectorXd t;
  Eigen::VectorXd weights;
};
IntegrandSamples sample_integrand(const Problem& problem, const Eigen::MatrixXd& values);

/// L and its four partials at every sample.
struct PartialSamples {
  Eigen::VectorXd value;
  std::array<Eigen::MatrixXd, 4> d;
};
PartialSamples sample_partials(const Problem& problem, const IntegrandSamples& samples);

/// sum_s w_s L(samples_s). Throws InputError if u is infeasible or on the wrong grid.
double evaluate(const Problem& problem, const SampledPath& u);

/// sum_s w_s (d1L.v + d2L.K[v] + d3L.v' + d4L.K[v']), with v zero at the constrained endpoints.
double directional_derivative(const Problem& problem, const SampledPath& u, const SampledPath& v);

/// Derivative of the discrete objective with respect to the node values (n x d), zero on
/// constrained nodes, so that sum_i g_i . v_i equals directional_derivative(u, v).
Eigen::MatrixXd gradient(const Problem& problem, const SampledPath& u);

/// Objective and unprojected gradient without feasibility checks (used by the solver).
struct Evaluation {
  double value = 0.0;
  Eigen::MatrixXd gradient;
};
Evaluation evaluate_with_gradient(const Problem& problem, const Eigen::MatrixXd& values);

/// Node part R = P1^T W d1L + P2^T W d2L (n x d) and cell part Psi = (Q3^T W d3L + Q4^T W d4L) / h
/// ((n-1) x d) of the gradient: g_i = R_i + Psi_{i-1} - Psi_i.
struct GradientParts {
  Eigen::MatrixXd node;
  Eigen::MatrixXd cell;
};
GradientParts gradient_parts(const Problem& problem, const Eigen::MatrixXd& values);

}  // namespace varker
