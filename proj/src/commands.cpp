#include "varker/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "varker/problem_spec.hpp"
#include "varker/expression.hpp"
#include "varker/residual.hpp"

namespace varker {

namespace {

using ojson = nlohmann::ordered_json;

ProblemSpecFile load(const std::string& spec_path, const Overrides& o) {
  ProblemSpecFile spec = load_problem_spec(spec_path);
  if (o.n) {
    if (*o.n < 3) throw InputError("--n: must be >= 3");
    spec.n = *o.n;
  }
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw InputError("--tol: must be > 0");
    spec.solver.grad_tol = *o.tol;
  }
  if (o.threshold) {
    if (!(*o.threshold >= 0.0)) throw InputError("--threshold: must be >= 0");
    spec.residual_threshold = *o.threshold;
  }
  if (o.seed) spec.solver.seed = *o.seed;
  return spec;
}

std::string column(const std::string& stem, int k, int dim) {
  return dim == 1 ? stem : stem + "_" + std::to_string(k + 1);
}

void write_table(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& table) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  for (size_t j = 0; j < header.size(); ++j) f << (j ? "," : "") << header[j];
  f << '\n';
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) f << (j ? "," : "") << format_csv_number(table(i, j));
    f << '\n';
  }
  if (!f) throw InputError("error writing " + path);
}

Eigen::VectorXd node_column(const Grid& grid) { return Eigen::Map<const Eigen::VectorXd>(grid.nodes().data(), grid.n()); }

// The first column of a CSV must reproduce the grid nodes.
void check_nodes(const Grid& grid, const Eigen::MatrixXd& table, const std::string& path) {
  if (table.rows() != grid.n()) {
    throw InputError(path + ": " + std::to_string(table.rows()) + " rows but the spec grid has " +
                     std::to_string(grid.n()) + " nodes");
  }
  const double tol = 1e-9 * std::max(1.0, std::max(std::abs(grid.a()), std::abs(grid.b())));
  for (int i = 0; i < grid.n(); ++i) {
    if (std::abs(table(i, 0) - grid.node(i)) > tol) {
      std::ostringstream os;
      os << path << ": row " << i + 1 << " has t = " << table(i, 0) << " but the spec grid node is " << grid.node(i);
      throw InputError(os.str());
    }
  }
}

ojson vector_json(const Eigen::VectorXd& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

bool has_fractional_form(const KernelSpec& spec) {
  if (std::holds_alternative<RiemannLiouville>(spec.variant)) return spec.lambda1 == 1.0 && spec.lambda2 == 0.0;
  if (std::holds_alternative<Hadamard>(spec.variant)) return spec.lambda1 == 0.0 && spec.lambda2 == -1.0;
  return false;
}

ojson residual_json(const Problem& problem, const SampledPath& u, double threshold) {
  const ResidualReport rep = first_integral_residual(problem, u);
  ojson r;
  r["constancy_defect"] = rep.constancy_defect;
  r["threshold"] = threshold;
  r["passed"] = rep.constancy_defect <= threshold;
  r["constant"] = vector_json(rep.constant);
  r["phi_first_cell"] = vector_json(rep.first_integral.row(0).transpose());
  r["phi_last_cell"] = vector_json(rep.first_integral.row(rep.first_integral.rows() - 1).transpose());
  r["max_differential_residual"] = rep.differential_residual.cwiseAbs().maxCoeff();
  if (has_fractional_form(problem.op().spec())) {
    const FractionalResidual fr = fractional_el_form(problem, u);
    r["fractional_form"] = {{"equation", fr.form},
                            {"max_residual", fr.residual.cwiseAbs().maxCoeff()},
                            {"agreement", fr.agreement},
                            {"interior_agreement", fr.interior_agreement}};
  }
  return r;
}

int exit_for(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return kExitOk;
    case SolveStatus::diverged: return kExitDiverged;
    case SolveStatus::max_iters:
    case SolveStatus::line_search_failed: return kExitNotConverged;
  }
  return kExitNotConverged;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitInputError;
}

}  // namespace

std::string format_csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

Eigen::MatrixXd read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == cell.c_str() || (end && *end != '\0')) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw InputError(path + ":" + std::to_string(lineno) + ": non-numeric field '" + cell + "'");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                       " fields, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

int cmd_solve(const std::string& spec_path, const std::string& out_dir, const Overrides& overrides, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const ProblemSpecFile spec = load(spec_path, overrides);
    const Problem problem = spec.problem();
    SolveOptions options = spec.solver;
    const CheckReport convex =
        check_convexity(problem.lagrangian(), ConvexityMode::full, spec.convexity_samples, spec.a, spec.b);
    options.convexity_certified = convex.passed;

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw InputError("cannot create " + out_dir + ": " + ec.message());
    const std::filesystem::path dir(out_dir);

    const SolveReport report = solve(problem, options);
    const Grid& grid = problem.grid();
    const int d = problem.dim();
    const Eigen::MatrixXd& u = report.u_star.values();
    const Eigen::MatrixXd du = cell_derivative(grid, u);

    Eigen::MatrixXd table(grid.n(), 1 + 4 * d);
    table.col(0) = node_column(grid);
    table.middleCols(1, d) = u;
    table.middleCols(1 + d, d) = cells_to_nodes(du);
    table.middleCols(1 + 2 * d, d) = problem.op().matrix() * u;
    table.middleCols(1 + 3 * d, d) = problem.op().cell_matrix() * du;
    std::vector<std::string> header{"t"};
    for (const char* stem : {"u", "du", "Ku", "Kdu"}) {
      for (int k = 0; k < d; ++k) header.push_back(column(stem, k, d));
    }
    write_table((dir / "solution.csv").string(), header, table);

    const size_t m = report.objective_trace.size();
    Eigen::MatrixXd trace(static_cast<Eigen::Index>(m), 4);
    for (size_t i = 0; i < m; ++i) {
      trace.row(static_cast<Eigen::Index>(i)) << static_cast<double>(i), report.objective_trace[i],
          report.grad_norm_trace[i], report.sobolev_norm_trace[i];
    }
    write_table((dir / "trace.csv").string(), {"iter", "objective", "grad_norm", "sobolev_norm"}, trace);

    const CoercivityAssessment monitor = monitor_coercivity(report, problem.p());
    ojson j;
    j["spec"] = spec.origin;
    j["status"] = to_string(report.status);
    j["message"] = report.message;
    j["iterations"] = report.iterations;
    j["n"] = grid.n();
    j["objective"] = report.objective_trace.back();
    j["grad_norm"] = report.grad_norm_trace.back();
    j["grad_tol"] = options.grad_tol;
    j["optimality"] = report.optimality;
    j["convexity_certified"] = convex.passed;
    j["norms"] = {{"sup", u.cwiseAbs().maxCoeff()},
                  {"lp", lp_norm(grid, u, problem.p())},
                  {"w1p", w1p_norm(report.u_star, problem.p())}};
    j["coercivity_monitor"] = {{"bounded", monitor.bounded},
                               {"possible_noncoercivity", monitor.possible_noncoercivity},
                               {"growth", monitor.growth},
                               {"message", monitor.message}};
    try {
      j["residual"] = residual_json(problem, report.u_star, spec.residual_threshold);
    } catch (const std::exception& e) {
      j["residual"] = {{"error", e.what()}};
    }
    std::ofstream rf(dir / "report.json", std::ios::binary);
    if (!rf) throw InputError("cannot write " + (dir / "report.json").string());
    rf << j.dump(2) << '\n';

    out << "status: " << to_string(report.status) << " (" << report.message << ")\n";
    out << "iterations: " << report.iterations << ", objective: " << format_csv_number(report.objective_trace.back())
        << ", gradient max-norm: " << format_csv_number(report.grad_norm_trace.back()) << '\n';
    if (!report.optimality.empty()) out << "optimality: " << report.optimality << '\n';
    out << monitor.message << '\n';
    if (j["residual"].contains("constancy_defect")) {
      out << "constancy_defect: " << format_csv_number(j["residual"]["constancy_defect"].get<double>()) << '\n';
    }
    return exit_for(report.status);
  });
}

int cmd_apply_op(const std::string& spec_path, const std::string& input_csv, const std::string& output_csv,
                 const Overrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemSpecFile spec = load(spec_path, overrides);
    const Grid grid = spec.grid();
    const Eigen::MatrixXd in = read_csv(input_csv);
    if (in.cols() < 2) throw InputError(input_csv + ": expected columns t,f");
    check_nodes(grid, in, input_csv);
    validate_spec(spec.op, grid);
    const DiscreteOperator op = assemble(spec.op, grid);
    const Eigen::MatrixXd f = in.rightCols(in.cols() - 1);
    const int d = static_cast<int>(f.cols());

    Eigen::MatrixXd table(grid.n(), 1 + 2 * d);
    table.col(0) = node_column(grid);
    table.middleCols(1, d) = apply(op, f);
    table.middleCols(1 + d, d) = apply_adjoint(op, f);
    std::vector<std::string> header{"t"};
    for (const char* stem : {"Kf", "Kstar_f"}) {
      for (int k = 0; k < d; ++k) header.push_back(column(stem, k, d));
    }
    write_table(output_csv, header, table);
    out << "applied " << spec.op.name() << " on " << grid.n() << " nodes -> " << output_csv << '\n';
    return kExitOk;
  });
}

int cmd_check(const std::string& spec_path, const Overrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemSpecFile spec = load(spec_path, overrides);
    if (!spec.has_certificates) throw InputError(spec.origin + ": certificates: section missing");
    const LagrangianExpr& L = *spec.lagrangian;
    SpotCheckOptions spot;
    spot.a = spec.a;
    spot.b = spec.b;
    spot.seed = overrides.seed.value_or(1);

    bool all = true;
    auto row = [&](const char* name, const std::optional<CheckReport>& rep) {
      out << name;
      if (!rep) {
        out << "not requested\n";
        return;
      }
      all = all && rep->passed;
      out << (rep->passed ? "PASS" : "FAIL") << "  [" << rep->condition << "]\n";
      for (const auto& f : rep->failures) out << "    " << f << '\n';
    };
    std::optional<CheckReport> reg, coe, cvx;
    if (spec.regularity) reg = check_regularity(L, *spec.regularity, spec.p, spec.q, spot);
    if (spec.coercivity) coe = check_coercivity(L, *spec.coercivity, spec.p, spec.q, spot);
    if (spec.convexity) cvx = check_convexity(L, *spec.convexity, spec.convexity_samples, spec.a, spec.b, spot.seed);
    row("regularity  ", reg);
    row("coercivity  ", coe);
    row("convexity   ", cvx);
    for (const auto& a : spec.assumptions) out << "assumed (not checked): " << a << '\n';
    return all ? kExitOk : kExitCheckFailed;
  });
}

int cmd_residual(const std::string& spec_path, const std::string& path_csv, const std::string& output_csv,
                 const Overrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemSpecFile spec = load(spec_path, overrides);
    const Problem problem = spec.problem();
    const Grid& grid = problem.grid();
    const int d = problem.dim();
    const Eigen::MatrixXd in = read_csv(path_csv);
    if (in.cols() < 1 + d) {
      throw InputError(path_csv + ": expected at least " + std::to_string(1 + d) + " columns (t and u)");
    }
    check_nodes(grid, in, path_csv);
    const SampledPath u(grid, in.middleCols(1, d));
    if (!problem.constraints().satisfied_by(u)) out << "warning: path does not satisfy the spec constraints\n";

    const ResidualReport rep = first_integral_residual(problem, u);
    Eigen::MatrixXd table(grid.cells(), 2 + d);
    for (int c = 0; c < grid.cells(); ++c) {
      table(c, 0) = grid.midpoint(c);
      table(c, 1 + d) = (rep.first_integral.row(c).transpose() - rep.constant).norm();
    }
    table.middleCols(1, d) = rep.first_integral;
    std::vector<std::string> header{"t_mid"};
    for (int k = 0; k < d; ++k) header.push_back(column("phi", k, d));
    header.push_back("deviation");
    write_table(output_csv, header, table);

    out << "constancy_defect: " << format_csv_number(rep.constancy_defect) << '\n';
    out << "threshold: " << format_csv_number(spec.residual_threshold) << '\n';
    if (has_fractional_form(problem.op().spec())) {
      const FractionalResidual fr = fractional_el_form(problem, u);
      out << "fractional form: " << fr.form << '\n';
      out << "  agreement with the first-integral form: " << format_csv_number(fr.agreement) << " (all interior nodes), "
          << format_csv_number(fr.interior_agreement) << " (10% away from the ends)\n";
    }
    return rep.constancy_defect <= spec.residual_threshold ? kExitOk : kExitCheckFailed;
  });
}

}  // namespace varker
