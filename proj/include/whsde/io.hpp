#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "whsde/control.hpp"
#include "whsde/model.hpp"
#include "whsde/sde.hpp"
#include "whsde/stability.hpp"

namespace whsde {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full-precision decimal (%.17g), identical across runs.
std::string format_g17(double v);

// Header t,S,I,B and one row per grid point; with a control field the header
// extends to t,S,I,B,u11,u12,u2.
std::string trajectory_csv(const Trajectory& trajectory,
                           const std::vector<Controls>* controls = nullptr);

// Header t,I_<scenario>...,B_<scenario>... in scenario order.
std::string scenario_csv(const TimeGrid& grid,
                         const std::vector<ScenarioOutcome>& outcomes);

nlohmann::json analysis_json(const DeterministicSummary& summary,
                             const StabilityReport& report);
nlohmann::json ensemble_stats_json(const EnsembleStats& stats);
nlohmann::json sweep_result_json(const SweepResult& result);
nlohmann::json scenario_outcomes_json(
    const std::vector<ScenarioOutcome>& outcomes);

void write_text_file(const std::string& path, const std::string& content);
void ensure_directory(const std::string& path);

}  // namespace whsde
