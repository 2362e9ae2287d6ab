#pragma once

#include <functional>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "varker/grid.hpp"

namespace varker {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

/// k(t, x) on the triangle a <= x < t <= b.
struct GeneralKernel {
  Fn2 k;
};
/// k(t, x) = (t - x)^(alpha - 1) / Gamma(alpha).
struct RiemannLiouville {
  double alpha = 0.5;
};
/// Riemann-Liouville kernel with order alpha(t, x) in [delta, 1].
struct RiemannLiouvilleVariable {
  Fn2 alpha;
  double delta = 0.0;
};
/// k(t, x) = log(t / x)^(alpha - 1) / (x Gamma(alpha)); needs a > 0.
struct Hadamard {
  double alpha = 0.5;
};
/// K[f] = f o phi for an increasing bijection phi of [a, b].
struct Substitution {
  Fn1 phi;
  Fn1 phi_prime;
};
struct Identity {};
struct Zero {};

using KernelVariant =
    std::variant<GeneralKernel, RiemannLiouville, RiemannLiouvilleVariable, Hadamard, Substitution, Identity, Zero>;

/// Declarative description of the operator
///   K[f](t) = lambda1 * int_a^t k(t,y) f(y) dy + lambda2 * int_t^b k(y,t) f(y) dy
/// or one of the non-kernel operators (substitution, identity, zero).
struct KernelSpec {
  KernelVariant variant = Zero{};
  double lambda1 = 1.0;
  double lambda2 = 0.0;

  static KernelSpec general(Fn2 k, double l1 = 1.0, double l2 = 0.0) { return {GeneralKernel{std::move(k)}, l1, l2}; }
  static KernelSpec riemann_liouville(double alpha, double l1 = 1.0, double l2 = 0.0) {
    return {RiemannLiouville{alpha}, l1, l2};
  }
  static KernelSpec riemann_liouville_variable(Fn2 alpha, double delta, double l1 = 1.0, double l2 = 0.0) {
    return {RiemannLiouvilleVariable{std::move(alpha), delta}, l1, l2};
  }
  static KernelSpec hadamard(double alpha, double l1 = 1.0, double l2 = 0.0) { return {Hadamard{alpha}, l1, l2}; }
  static KernelSpec substitution(Fn1 phi, Fn1 phi_prime) {
    return {Substitution{std::move(phi), std::move(phi_prime)}, 1.0, 0.0};
  }
  static KernelSpec identity() { return {Identity{}, 1.0, 0.0}; }
  static KernelSpec zero() { return {Zero{}, 0.0, 0.0}; }

  std::string name() const;
  bool is_kernel_operator() const;
  /// For kernel operators: the same kernel with lambda1 and lambda2 exchanged (the adjoint formula).
  KernelSpec with_swapped_lambdas() const;
  /// Kernel value k(t, x) for kernel operators; throws otherwise.
  double kernel(double t, double x) const;
};

/// Validates spec against the grid (endpoint and order constraints). Throws InputError.
void validate_spec(const KernelSpec& spec, const Grid& grid);

/// Validates the (p, q) pairing for the variant: q = p for fixed-order Riemann-Liouville, Hadamard,
/// substitution and identity; q = p' and delta > 1/p for variable order; q >= p' for a general kernel.
void validate_exponents(const KernelSpec& spec, double p, double q);

/// Assembled operator. Rows are evaluation points, columns are node samples (piecewise-linear
/// input) or cell samples (piecewise-constant input). Adjoints are W-weighted transposes so
/// discrete duality holds to rounding.
class DiscreteOperator {
 public:
  DiscreteOperator(KernelSpec spec, Grid grid);

  const KernelSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }

  /// n x n: node inputs -> node values.
  const Eigen::MatrixXd& matrix() const { return node_matrix_; }
  /// n x (n-1): cell inputs -> node values.
  const Eigen::MatrixXd& cell_matrix() const { return cell_matrix_; }
  /// W^-1 A^T W.
  const Eigen::MatrixXd& adjoint_matrix() const { return adjoint_matrix_; }
  /// Wc^-1 C^T W, (n-1) x n: node inputs -> cell values.
  const Eigen::MatrixXd& cell_adjoint_matrix() const { return cell_adjoint_matrix_; }
  /// (n-1) x n and (n-1) x (n-1): the same operator evaluated at cell midpoints.
  const Eigen::MatrixXd& midpoint_matrix() const { return midpoint_matrix_; }
  const Eigen::MatrixXd& midpoint_cell_matrix() const { return midpoint_cell_matrix_; }

 private:
  KernelSpec spec_;
  Grid grid_;
  Eigen::MatrixXd node_matrix_;
  Eigen::MatrixXd cell_matrix_;
  Eigen::MatrixXd adjoint_matrix_;
  Eigen::MatrixXd cell_adjoint_matrix_;
  Eigen::MatrixXd midpoint_matrix_;
  Eigen::MatrixXd midpoint_cell_matrix_;
};

DiscreteOperator assemble(const KernelSpec& spec, const Grid& grid);

/// Weights reproducing K[f](tau) from node samples (piecewise-linear f) and from cell samples
/// (piecewise-constant f).
struct RowWeights {
  Eigen::VectorXd nodes;
  Eigen::VectorXd cells;
};
RowWeights operator_row(const KernelSpec& spec, const Grid& grid, double tau);

/// K[f] at nodes. f is n x d (node samples).
Eigen::MatrixXd apply(const DiscreteOperator& op, const Eigen::MatrixXd& node_samples);
/// K[f] at nodes for a piecewise-constant f given as (n-1) x d cell samples.
Eigen::MatrixXd apply_cells(const DiscreteOperator& op, const Eigen::MatrixXd& cell_samples);
/// K*[g] at nodes.
Eigen::MatrixXd apply_adjoint(const DiscreteOperator& op, const Eigen::MatrixXd& node_samples);

/// Continuous adjoint assembled on its own (lambda-swapped kernel, or (g / phi') o phi^-1 for a
/// substitution). Only used as a cross-check of the operational adjoint.
Eigen::MatrixXd assemble_direct_adjoint(const KernelSpec& spec, const Grid& grid);

/// ||k||_{L^q(triangle)}; +inf when the kernel is not q-integrable.
double kernel_lq_norm(const KernelSpec& spec, double a, double b, double q);

/// Bound C with ||K f||_{L^q} <= C ||f||_{L^p}. For kernel operators this is
/// (b-a)^(1/p' - 1/q) ||k||_{L^q} (|lambda1| + |lambda2|), requiring q >= p'.
double operator_norm_bound(const KernelSpec& spec, const Grid& grid, double p, double q);

}  // namespace varker
