#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "varker/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"varker: generalized Lagrangian functionals with kernel operators"};
  app.require_subcommand(1);

  varker::Overrides o;
  app.add_option("--n", o.n, "Number of grid nodes (overrides discretization.n)")->check(CLI::Range(3, 1 << 24));
  app.add_option("--tol", o.tol, "Gradient tolerance (overrides solver.grad_tol)");
  app.add_option("--threshold", o.threshold, "Constancy-defect threshold for residual");
  app.add_option("--seed", o.seed, "Random seed for the initial path and the checks");

  std::string spec, out_dir = "out", input, output, path, residual_out = "residual.csv";

  auto* solve = app.add_subcommand("solve", "Minimize the functional; writes solution.csv, trace.csv, report.json");
  solve->add_option("spec", spec, "Problem spec (JSON)")->required();
  solve->add_option("-o,--out", out_dir, "Output directory");
  solve->fallthrough();

  auto* apply = app.add_subcommand("apply-op", "Apply K and K* to sampled columns t,f");
  apply->add_option("spec", spec, "Problem spec (JSON)")->required();
  apply->add_option("input", input, "Input CSV")->required();
  apply->add_option("output", output, "Output CSV")->required();
  apply->fallthrough();

  auto* check = app.add_subcommand("check", "Verify the regularity, coercivity and convexity certificates");
  check->add_option("spec", spec, "Problem spec (JSON)")->required();
  check->fallthrough();

  auto* residual = app.add_subcommand("residual", "First-integral residual of a sampled path");
  residual->add_option("spec", spec, "Problem spec (JSON)")->required();
  residual->add_option("path", path, "CSV with columns t,u")->required();
  residual->add_option("-o,--out", residual_out, "Residual CSV");
  residual->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return varker::kExitInputError;
  }

  if (*solve) return varker::cmd_solve(spec, out_dir, o, std::cout, std::cerr);
  if (*apply) return varker::cmd_apply_op(spec, input, output, o, std::cout, std::cerr);
  if (*check) return varker::cmd_check(spec, o, std::cout, std::cerr);
  return varker::cmd_residual(spec, path, residual_out, o, std::cout, std::cerr);
}
