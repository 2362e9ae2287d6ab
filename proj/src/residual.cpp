#include "varker/residual.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

namespace varker {

namespace {

void check(const Problem& problem, const SampledPath& u) {
  if (!u.grid().same_as(problem.grid())) throw InputError("residual: path lives on a different grid");
  if (u.dim() != problem.dim()) throw InputError("residual: path dimension does not match the problem");
}

void check_finite(const GradientParts& parts) {
  if (!parts.node.allFinite() || !parts.cell.allFinite()) throw DomainError("residual: non-finite partials");
}

Eigen::MatrixXd node_density(const Problem& problem, const GradientParts& parts) {
  return problem.grid().weight_vector().cwiseInverse().asDiagonal() * parts.node;
}

Eigen::MatrixXd differential_from(const Problem& problem, const GradientParts& parts) {
  const Eigen::MatrixXd r = node_density(problem, parts);
  const Eigen::Index n = r.rows();
  const double h = problem.grid().h();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, r.cols());
  for (Eigen::Index i = 1; i + 1 < n; ++i) out.row(i) = (parts.cell.row(i) - parts.cell.row(i - 1)) / h - r.row(i);
  return out;
}

}  // namespace

ResidualReport first_integral_residual(const Problem& problem, const SampledPath& u) {
  check(problem, u);
  const GradientParts parts = gradient_parts(problem, u.values());
  check_finite(parts);
  const Eigen::MatrixXd r = node_density(problem, parts);
  const Eigen::Index m = parts.cell.rows();
  const double h = problem.grid().h();

  ResidualReport rep{problem.grid(), {}, {}, 0.0, {}};
  rep.first_integral.resize(m, r.cols());
  Eigen::RowVectorXd to_node = Eigen::RowVectorXd::Zero(r.cols());
  for (Eigen::Index c = 0; c < m; ++c) {
    const Eigen::RowVectorXd to_mid = to_node + (h / 8.0) * (3.0 * r.row(c) + r.row(c + 1));
    rep.first_integral.row(c) = parts.cell.row(c) - to_mid;
    to_node += 0.5 * h * (r.row(c) + r.row(c + 1));
  }
  rep.constant = rep.first_integral.colwise().mean().transpose();
  double worst = 0.0;
  for (Eigen::Index c = 0; c < m; ++c) worst = std::max(worst, (rep.first_integral.row(c).transpose() - rep.constant).norm());
  rep.constancy_defect = worst / (1.0 + rep.constant.norm());
  rep.differential_residual = differential_from(problem, parts);
  return rep;
}

Eigen::MatrixXd differential_residual(const Problem& problem, const SampledPath& u) {
  check(problem, u);
  const GradientParts parts = gradient_parts(problem, u.values());
  check_finite(parts);
  return differential_from(problem, parts);
}

FractionalResidual fractional_el_form(const Problem& problem, const SampledPath& u) {
  check(problem, u);
  const KernelSpec& spec = problem.op().spec();
  double alpha = 0.0;
  bool hadamard = false;
  if (const auto* rl = std::get_if<RiemannLiouville>(&spec.variant)) {
    if (spec.lambda1 != 1.0 || spec.lambda2 != 0.0) {
      throw InputError("fractional form: Riemann-Liouville needs lambda1 = 1, lambda2 = 0");
    }
    alpha = rl->alpha;
  } else if (const auto* hd = std::get_if<Hadamard>(&spec.variant)) {
    if (spec.lambda1 != 0.0 || spec.lambda2 != -1.0) {
      throw InputError("fractional form: Hadamard needs lambda1 = 0, lambda2 = -1");
    }
    alpha = hd->alpha;
    hadamard = true;
  } else {
    throw InputError("fractional form: no specialisation for operator '" + spec.name() + "'");
  }

  const Grid& grid = problem.grid();
  const DiscreteOperator& op = problem.op();
  const Eigen::MatrixXd& values = u.values();
  const Eigen::MatrixXd deriv = cell_derivative(grid, values);
  IntegrandSamples s;
  s.x[0] = values;
  s.x[1] = op.matrix() * values;
  s.x[2] = cells_to_nodes(deriv);
  s.x[3] = op.cell_matrix() * deriv;
  s.t = Eigen::Map<const Eigen::VectorXd>(grid.nodes().data(), grid.n());
  s.weights = grid.weight_vector();
  const PartialSamples partials = sample_partials(problem, s);

  const Eigen::MatrixXd adjoint = assemble_direct_adjoint(spec, grid);
  const Eigen::MatrixXd k2 = adjoint * partials.d[1];
  const Eigen::MatrixXd k4 = adjoint * partials.d[3];
  const Eigen::Index n = grid.n();
  const double h = grid.h();
  FractionalResidual out;
  out.residual = Eigen::MatrixXd::Zero(n, problem.dim());
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    Eigen::RowVectorXd a4;
    if (alpha == 1.0) {
      a4 = hadamard ? Eigen::RowVectorXd(-partials.d[3].row(i) / grid.node(static_cast<int>(i)))
                    : Eigen::RowVectorXd(-partials.d[3].row(i));
    } else {
      a4 = (k4.row(i + 1) - k4.row(i - 1)) / (2.0 * h);
    }
    const Eigen::RowVectorXd d3 = (partials.d[2].row(i + 1) - partials.d[2].row(i - 1)) / (2.0 * h);
    out.residual.row(i) = d3 + a4 - partials.d[0].row(i) - k2.row(i);
  }
  const Eigen::MatrixXd diff = differential_residual(problem, u);
  out.agreement = n > 2 ? (out.residual - diff).middleRows(1, n - 2).cwiseAbs().maxCoeff() : 0.0;
  const double margin = 0.1 * grid.length();
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double t = grid.node(static_cast<int>(i));
    if (t < grid.a() + margin || t > grid.b() - margin) continue;
    out.interior_agreement = std::max(out.interior_agreement, (out.residual.row(i) - diff.row(i)).cwiseAbs().maxCoeff());
  }
  out.form = hadamard ? "d/dt d3L - D^{1-alpha}_{a+}[d4L] = d1L - J^alpha_{a+}[d2L]"
                      : "d/dt d3L - D^{1-alpha}_{b-}[d4L] = d1L + I^alpha_{b-}[d2L]";
  return out;
}

}  // namespace varker
