#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include <Eigen/Dense>

namespace varker {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitNotConverged = 2,
  kExitDiverged = 3,
  kExitCheckFailed = 4,
};

/// Command-line values that override the spec file.
struct Overrides {
  std::optional<int> n;
  std::optional<double> tol;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
};

/// Writes solution.csv, trace.csv and report.json into out_dir.
int cmd_solve(const std::string& spec_path, const std::string& out_dir, const Overrides& overrides, std::ostream& out,
              std::ostream& err);
/// Reads t,f columns and writes t, K[f], K*[f].
int cmd_apply_op(const std::string& spec_path, const std::string& input_csv, const std::string& output_csv,
                 const Overrides& overrides, std::ostream& out, std::ostream& err);
/// Prints the regularity / coercivity / convexity verdict table.
int cmd_check(const std::string& spec_path, const Overrides& overrides, std::ostream& out, std::ostream& err);
/// Reads t,u columns, writes the first-integral residual and compares the defect with the threshold.
int cmd_residual(const std::string& spec_path, const std::string& path_csv, const std::string& output_csv,
                 const Overrides& overrides, std::ostream& out, std::ostream& err);

/// Numeric CSV: optional header line, comma separated. Returns rows x columns.
Eigen::MatrixXd read_csv(const std::string& path);
/// Fixed 17-significant-digit scientific format.
std::string format_csv_number(double v);

}  // namespace varker
