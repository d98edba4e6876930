#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "whsde/control.hpp"
#include "whsde/model.hpp"
#include "whsde/sde.hpp"

namespace whsde {

// Invalid or malformed configuration; the message names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ControlConfig {
  ControlWeights weights;
  Vec3 adjoint_n{0.01, 0.02, 0.03};
  SweepSettings sweep;
  std::vector<Scenario> scenarios{Scenario::None, Scenario::ImmunoOnly,
                                  Scenario::AntiviralOnly, Scenario::Combined};
  bool operator==(const ControlConfig&) const = default;
};

struct SweepAxis {
  std::string param;  // omega|beta|mu|mu1|alpha|p|q|sigma1|sigma2|sigma
  double min = 0.0;
  double max = 0.0;
  int count = 2;
  bool log_scale = false;
  bool operator==(const SweepAxis&) const = default;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;       // 1 or 2
  std::vector<std::string> metrics;  // see kSweepMetrics
  bool operator==(const SweepSpec&) const = default;
};

inline const std::vector<std::string> kSweepMetrics = {
    "extinction_probability", "lyapunov_max",      "condition_a",
    "condition_b",            "negative_definite", "terminal_mean_B"};

struct RunConfig {
  ModelParams params;
  NoiseParams noise;
  TimeGrid grid;
  SimState initial;
  std::int64_t n_paths = 500;
  std::uint64_t base_seed = 12345;
  double extinction_threshold = 0.01;
  double epsilon = 0.05;  // for the Chebyshev bound k(epsilon)
  RetentionPolicy retention;
  std::string output_dir = "out";
  std::string time_unit = "day";  // metadata only
  std::optional<double> feasible_n;
  std::optional<double> feasible_b_max;
  std::optional<ControlConfig> control;
  std::optional<SweepSpec> sweep;
  bool operator==(const RunConfig&) const = default;
};

// Strict JSON parsing: unknown keys, malformed values and invariant
// violations are ConfigErrors carrying the field path.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& cfg);

// Non-fatal issues (e.g. u2_max above the burst rate alpha).
std::vector<std::string> config_warnings(const RunConfig& cfg);

const std::vector<std::string>& preset_names();
RunConfig preset_config(const std::string& name);
std::string preset_document(const std::string& name);

EnsembleOptions ensemble_options(const RunConfig& cfg);

}  // namespace whsde
