#include "varker/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace varker {

Grid::Grid(double a, double b, int n) : a_(a), b_(b), n_(n) {
  if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b)) {
    throw InputError("grid: need finite a < b");
  }
  if (n < 2) throw InputError("grid: need at least 2 nodes, got " + std::to_string(n));
  h_ = (b - a) / (n - 1);
  nodes_.resize(static_cast<size_t>(n));
  weights_.assign(static_cast<size_t>(n), h_);
  for (int i = 0; i < n; ++i) nodes_[static_cast<size_t>(i)] = a + i * h_;
  nodes_.back() = b;
  weights_.front() = 0.5 * h_;
  weights_.back() = 0.5 * h_;
}

Grid make_grid(double a, double b, int n) { return Grid(a, b, n); }

SampledPath::SampledPath(Grid grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.rows() != grid_.n()) {
    throw InputError("path: expected " + std::to_string(grid_.n()) + " node rows, got " +
                     std::to_string(values_.rows()));
  }
  if (values_.cols() < 1) throw InputError("path: dimension must be >= 1");
  deriv_ = cell_derivative(grid_, values_);
}

void ConstraintSet::validate(int dim) const {
  if (left && left->size() != dim) throw InputError("constraints: left value has wrong dimension");
  if (right && right->size() != dim) throw InputError("constraints: right value has wrong dimension");
}

bool ConstraintSet::satisfied_by(const SampledPath& u) const {
  const auto& v = u.values();
  if (left && !(v.row(0).transpose().array() == left->array()).all()) return false;
  if (right && !(v.row(v.rows() - 1).transpose().array() == right->array()).all()) return false;
  return true;
}

Eigen::MatrixXd cell_derivative(const Grid& grid, const Eigen::MatrixXd& values) {
  const Eigen::Index m = values.rows() - 1;
  return (values.bottomRows(m) - values.topRows(m)) / grid.h();
}

Eigen::MatrixXd cells_to_nodes(const Eigen::MatrixXd& cell_values) {
  const Eigen::Index m = cell_values.rows();
  Eigen::MatrixXd out(m + 1, cell_values.cols());
  out.row(0) = cell_values.row(0);
  out.row(m) = cell_values.row(m - 1);
  if (m > 1) out.middleRows(1, m - 1) = 0.5 * (cell_values.topRows(m - 1) + cell_values.bottomRows(m - 1));
  return out;
}

namespace {

void check_exponent(double r) {
  if (!(r > 1.0)) throw InputError("norm exponent must be > 1 (or inf)");
}

double weighted_power_sum(const Eigen::MatrixXd& f, double r, auto weight) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) s += weight(i) * std::pow(f.row(i).norm(), r);
  return std::pow(s, 1.0 / r);
}

double max_row_norm(const Eigen::MatrixXd& f) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) m = std::max(m, f.row(i).norm());
  return m;
}

}  // namespace

double lp_norm(const Grid& grid, const Eigen::MatrixXd& node_values, double r) {
  check_exponent(r);
  if (node_values.rows() != grid.n()) throw InputError("lp_norm: sample count does not match grid");
  if (std::isinf(r)) return max_row_norm(node_values);
  const auto w = grid.weights();
  return weighted_power_sum(node_values, r, [&](Eigen::Index i) { return w[static_cast<size_t>(i)]; });
}

double lp_norm_cells(const Grid& grid, const Eigen::MatrixXd& cell_values, double r) {
  check_exponent(r);
  if (cell_values.rows() != grid.cells()) throw InputError("lp_norm: cell count does not match grid");
  if (std::isinf(r)) return max_row_norm(cell_values);
  const double h = grid.h();
  return weighted_power_sum(cell_values, r, [h](Eigen::Index) { return h; });
}

double w1p_norm(const SampledPath& u, double p) {
  if (std::isinf(p)) throw InputError("w1p_norm: p must be finite");
  const double a = lp_norm(u.grid(), u.values(), p);
  const double b = lp_norm_cells(u.grid(), u.deriv(), p);
  return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
}

double weighted_dot(const Grid& grid, const Eigen::MatrixXd& f, const Eigen::MatrixXd& g) {
  if (f.rows() != grid.n() || g.rows() != grid.n() || f.cols() != g.cols()) {
    throw InputError("weighted_dot: shape mismatch");
  }
  return (f.cwiseProduct(g).rowwise().sum().array() * grid.weight_vector().array()).sum();
}

DominationConstants affine_domination(const Grid& grid, double p, const Eigen::VectorXd& u0,
                                      double operator_bound) {
  check_exponent(p);
  const double len = grid.length();
  const double p_conj = p / (p - 1.0);
  const double u0_norm = u0.norm();
  DominationConstants c;
  c.a0 = std::max({len, std::pow(len, 1.0 / p_conj), operator_bound, operator_bound * len});
  c.a1 = std::max(std::pow(len, 1.0 / p) * u0_norm, u0_norm) * std::max(1.0, operator_bound);
  return c;
}

}  // namespace varker
