#pragma once

#include <iosfwd>

#include "whsde/config.hpp"

namespace whsde {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNoConverge = 3;
inline constexpr int kExitIo = 4;

// Each command writes its artifacts under cfg.output_dir, prints a summary
// to out and warnings to err, and returns a process exit code.

// analysis.json: R0, equilibria, matrix, eigenvalues, condition verdicts,
// decay bound, boundedness and permanence constants.
int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// ensemble_stats.json plus one trajectory CSV per retained path.
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// scenario_comparison.csv, control_solution.json, and a mean-trajectory CSV
// per swept scenario.  Returns kExitNoConverge when any sweep fails to
// converge; artifacts are still written.
int cmd_control(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// sweep.csv: one row per grid cell of the parameter sweep.
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace whsde
