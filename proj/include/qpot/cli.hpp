// Command implementations behind the qpot executable. Each returns the
// process exit code: 0 success, 1 failed checks or internal errors,
// 2 solver singularity, 3 spec/input errors.

#pragma once

#include <map>
#include <string>

namespace qpot {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitSingular = 2;
inline constexpr int kExitSpec = 3;

/// Runs the pipeline for a spec file and writes report.json plus R.csv,
/// p.csv, S.csv, V.csv (and psi.csv when emitted) under out_dir.
int run_invert(const std::string& spec_path, const std::string& out_dir);

/// Prints the first n solvability eigenvalues per slice as JSON lines.
int run_eigs(const std::string& spec_path, int n);

/// Runs a golden case through the pipeline and prints its pass/fail table.
int run_case(const std::string& name, const std::map<std::string, double>& overrides);

/// Renders a field CSV dump to a standalone SVG.
int run_plot(const std::string& csv_path, const std::string& svg_path);

}  // namespace qpot
