#include "varker/functional.hpp"

#include <cmath>

namespace varker {

std::string to_string(IntegrandRule rule) {
  return rule == IntegrandRule::cell_midpoint ? "cell_midpoint" : "node_average";
}

IntegrandRule integrand_rule_from_string(const std::string& name) {
  if (name == "cell_midpoint") return IntegrandRule::cell_midpoint;
  if (name == "node_average") return IntegrandRule::node_average;
  throw InputError("unknown integrand rule '" + name + "' (expected cell_midpoint or node_average)");
}

Problem::Problem(Grid grid, LagrangianExpr lagrangian, KernelSpec spec, ConstraintSet constraints, double p,
                 double q, IntegrandRule rule)
    : lagrangian_(std::move(lagrangian)), constraints_(std::move(constraints)), p_(p), q_(q), rule_(rule) {
  validate_exponents(spec, p, q);
  constraints_.validate(lagrangian_.dim());
  op_ = std::make_shared<const DiscreteOperator>(std::move(spec), std::move(grid));
}

namespace {

void check_values(const Problem& problem, const Eigen::MatrixXd& values) {
  if (values.rows() != problem.grid().n() || values.cols() != problem.dim()) {
    throw InputError("path shape " + std::to_string(values.rows()) + "x" + std::to_string(values.cols()) +
                     " does not match problem (" + std::to_string(problem.grid().n()) + "x" +
                     std::to_string(problem.dim()) + ")");
  }
}

void check_path(const Problem& problem, const SampledPath& u) {
  if (!u.grid().same_as(problem.grid())) throw InputError("path lives on a different grid");
  check_values(problem, u.values());
  if (!problem.constraints().satisfied_by(u)) throw InputError("path violates the endpoint constraints");
}

void check_variation(const Problem& problem, const SampledPath& v) {
  if (!v.grid().same_as(problem.grid())) throw InputError("variation lives on a different grid");
  check_values(problem, v.values());
  const auto& c = problem.constraints();
  if (c.left && !v.values().row(0).isZero(0.0)) throw InputError("variation must vanish at the constrained left end");
  if (c.right && !v.values().row(v.values().rows() - 1).isZero(0.0)) {
    throw InputError("variation must vanish at the constrained right end");
  }
}

Eigen::MatrixXd node_midpoints(const Eigen::MatrixXd& values) {
  const Eigen::Index m = values.rows() - 1;
  return 0.5 * (values.topRows(m) + values.bottomRows(m));
}

// Transpose of the node -> midpoint average.
Eigen::MatrixXd node_midpoints_transpose(const Eigen::MatrixXd& cells) {
  const Eigen::Index m = cells.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m + 1, cells.cols());
  out.topRows(m) += 0.5 * cells;
  out.bottomRows(m) += 0.5 * cells;
  return out;
}

// Transpose of cells_to_nodes.
Eigen::MatrixXd cells_to_nodes_transpose(const Eigen::MatrixXd& nodes) {
  const Eigen::Index m = nodes.rows() - 1;
  Eigen::MatrixXd out(m, nodes.cols());
  for (Eigen::Index c = 0; c < m; ++c) {
    out.row(c) = (c == 0 ? 1.0 : 0.5) * nodes.row(c) + (c + 1 == m ? 1.0 : 0.5) * nodes.row(c + 1);
  }
  return out;
}

void zero_constrained(const Problem& problem, Eigen::MatrixXd& g) {
  if (problem.constraints().left) g.row(0).setZero();
  if (problem.constraints().right) g.row(g.rows() - 1).setZero();
}

}  // namespace

IntegrandSamples sample_integrand(const Problem& problem, const Eigen::MatrixXd& values) {
  check_values(problem, values);
  const Grid& grid = problem.grid();
  const DiscreteOperator& op = problem.op();
  const Eigen::MatrixXd deriv = cell_derivative(grid, values);
  IntegrandSamples s;
  if (problem.rule() == IntegrandRule::cell_midpoint) {
    const int m = grid.cells();
    s.x[0] = node_midpoints(values);
    s.x[1] = op.midpoint_matrix() * values;
    s.x[2] = deriv;
    s.x[3] = op.midpoint_cell_matrix() * deriv;
    s.t.resize(m);
    for (int c = 0; c < m; ++c) s.t[c] = grid.midpoint(c);
    s.weights = Eigen::VectorXd::Constant(m, grid.h());
  } else {
    s.x[0] = values;
    s.x[1] = op.matrix() * values;
    s.x[2] = cells_to_nodes(deriv);
    s.x[3] = op.cell_matrix() * deriv;
    s.t = Eigen::Map<const Eigen::VectorXd>(grid.nodes().data(), grid.n());
    s.weights = grid.weight_vector();
  }
  return s;
}

PartialSamples sample_partials(const Problem& problem, const IntegrandSamples& samples) {
  const int d = problem.dim();
  const Eigen::Index m = samples.t.size();
  PartialSamples out;
  out.value.resize(m);
  for (auto& block : out.d) block.resize(m, d);
  std::vector<double> packed(static_cast<size_t>(4 * d + 1));
  std::vector<double> grad(static_cast<size_t>(4 * d));
  for (Eigen::Index s = 0; s < m; ++s) {
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < d; ++k) packed[static_cast<size_t>(i * d + k)] = samples.x[static_cast<size_t>(i)](s, k);
    }
    packed.back() = samples.t[s];
    out.value[s] = problem.lagrangian().eval_partials(packed, grad);
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < d; ++k) out.d[static_cast<size_t>(i)](s, k) = grad[static_cast<size_t>(i * d + k)];
    }
  }
  return out;
}

double evaluate(const Problem& problem, const SampledPath& u) {
  check_path(problem, u);
  const IntegrandSamples s = sample_integrand(problem, u.values());
  const int d = problem.dim();
  std::vector<double> packed(static_cast<size_t>(4 * d + 1));
  double total = 0.0;
  for (Eigen::Index r = 0; r < s.t.size(); ++r) {
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < d; ++k) packed[static_cast<size_t>(i * d + k)] = s.x[static_cast<size_t>(i)](r, k);
    }
    packed.back() = s.t[r];
    total += s.weights[r] * problem.lagrangian().eval(packed);
  }
  return total;
}

double directional_derivative(const Problem& problem, const SampledPath& u, const SampledPath& v) {
  check_path(problem, u);
  check_variation(problem, v);
  const IntegrandSamples su = sample_integrand(problem, u.values());
  const PartialSamples partials = sample_partials(problem, su);
  const IntegrandSamples sv = sample_integrand(problem, v.values());
  double total = 0.0;
  for (Eigen::Index r = 0; r < su.t.size(); ++r) {
    double local = 0.0;
    for (size_t i = 0; i < 4; ++i) local += partials.d[i].row(r).dot(sv.x[i].row(r));
    total += su.weights[r] * local;
  }
  return total;
}

namespace {

GradientParts parts_and_value(const Problem& problem, const Eigen::MatrixXd& values, double* value) {
  const IntegrandSamples s = sample_integrand(problem, values);
  const PartialSamples partials = sample_partials(problem, s);
  std::array<Eigen::MatrixXd, 4> y;
  for (size_t i = 0; i < 4; ++i) y[i] = s.weights.asDiagonal() * partials.d[i];
  const DiscreteOperator& op = problem.op();
  GradientParts parts;
  if (problem.rule() == IntegrandRule::cell_midpoint) {
    parts.node = node_midpoints_transpose(y[0]) + op.midpoint_matrix().transpose() * y[1];
    parts.cell = y[2] + op.midpoint_cell_matrix().transpose() * y[3];
  } else {
    parts.node = y[0] + op.matrix().transpose() * y[1];
    parts.cell = cells_to_nodes_transpose(y[2]) + op.cell_matrix().transpose() * y[3];
  }
  parts.cell /= problem.grid().h();
  if (value) *value = s.weights.dot(partials.value);
  return parts;
}

}  // namespace

GradientParts gradient_parts(const Problem& problem, const Eigen::MatrixXd& values) {
  return parts_and_value(problem, values, nullptr);
}

Evaluation evaluate_with_gradient(const Problem& problem, const Eigen::MatrixXd& values) {
  Evaluation e;
  GradientParts parts = parts_and_value(problem, values, &e.value);
  const Eigen::Index m = parts.cell.rows();
  e.gradient = std::move(parts.node);
  e.gradient.bottomRows(m) += parts.cell;
  e.gradient.topRows(m) -= parts.cell;
  return e;
}

Eigen::MatrixXd gradient(const Problem& problem, const SampledPath& u) {
  check_path(problem, u);
  Eigen::MatrixXd g = evaluate_with_gradient(problem, u.values()).gradient;
  zero_constrained(problem, g);
  return g;
}

}  // namespace varker
