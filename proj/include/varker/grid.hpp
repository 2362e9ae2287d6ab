#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace varker {

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform partition of [a, b] with composite trapezoid weights.
class Grid {
 public:
  Grid(double a, double b, int n);

  double a() const { return a_; }
  double b() const { return b_; }
  int n() const { return n_; }
  int cells() const { return n_ - 1; }
  double h() const { return h_; }
  double length() const { return b_ - a_; }

  double node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  double midpoint(int c) const { return 0.5 * (node(c) + node(c + 1)); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  Eigen::Map<const Eigen::VectorXd> weight_vector() const {
    return {weights_.data(), static_cast<Eigen::Index>(weights_.size())};
  }

  bool same_as(const Grid& other) const { return a_ == other.a_ && b_ == other.b_ && n_ == other.n_; }

 private:
  double a_;
  double b_;
  int n_;
  double h_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

Grid make_grid(double a, double b, int n);

/// Node values of u : [a, b] -> R^d (n x d) together with the cell derivative ((n-1) x d).
class SampledPath {
 public:
  SampledPath(Grid grid, Eigen::MatrixXd values);

  template <class F>
  static SampledPath from_function(const Grid& grid, int dim, F&& f) {
    Eigen::MatrixXd v(grid.n(), dim);
    for (int i = 0; i < grid.n(); ++i) {
      for (int k = 0; k < dim; ++k) v(i, k) = f(grid.node(i), k);
    }
    return SampledPath(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  int dim() const { return static_cast<int>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::MatrixXd& deriv() const { return deriv_; }

 private:
  Grid grid_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd deriv_;
};

/// Endpoint data; a missing side is free.
struct ConstraintSet {
  std::optional<Eigen::VectorXd> left;
  std::optional<Eigen::VectorXd> right;

  void validate(int dim) const;
  bool satisfied_by(const SampledPath& u) const;
};

/// Forward difference of node samples: ((n-1) x d).
Eigen::MatrixXd cell_derivative(const Grid& grid, const Eigen::MatrixXd& values);

/// Node values of a cell function: adjacent-cell average inside, one-sided at the ends.
Eigen::MatrixXd cells_to_nodes(const Eigen::MatrixXd& cell_values);

/// (sum_i w_i |f_i|^r)^(1/r) for node samples, max_i |f_i| for r = inf. Rows are points.
double lp_norm(const Grid& grid, const Eigen::MatrixXd& node_values, double r);

/// Same for a piecewise-constant cell function (exact integration, weight h per cell).
double lp_norm_cells(const Grid& grid, const Eigen::MatrixXd& cell_values, double r);

double w1p_norm(const SampledPath& u, double p);

/// Trapezoid-weighted inner product sum_i w_i <f_i, g_i>.
double weighted_dot(const Grid& grid, const Eigen::MatrixXd& f, const Eigen::MatrixXd& g);

/// Affine domination constants for paths pinned at u(a) = u0:
///   ||u||_inf <= A0 ||u'||_Lp + A1.
struct DominationConstants {
  double a0 = 0.0;
  double a1 = 0.0;
};
DominationConstants affine_domination(const Grid& grid, double p, const Eigen::VectorXd& u0,
                                      double operator_bound);

}  // namespace varker
