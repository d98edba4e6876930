#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "whsde/model.hpp"
#include "whsde/rng.hpp"

namespace whsde {

// Discrete solution of one path.  States are clamped at zero componentwise;
// clamp_events counts the per-component truncations.
struct Trajectory {
  TimeGrid grid;
  std::vector<SimState> states;  // n_steps + 1 entries
  std::int64_t clamp_events = 0;
};

struct StepResult {
  SimState state;
  int clamp_events;  // 0..3 truncations in this step
};

// One Euler-Maruyama step: x + f(x)*dt + g(x).dW, with channels (W1, W1, W2),
// then componentwise truncation at zero.  u == nullptr integrates the
// uncontrolled system.
StepResult em_step(const SimState& x, const Controls* u,
                   const ModelParams& par, const NoiseParams& noise,
                   double dw1, double dw2, double dt);

// Integrates one path on the given increments.  A non-empty control field
// must have n_steps + 1 entries (value at t_k applies to step k).
Trajectory simulate_path(const SimState& initial, const TimeGrid& grid,
                         const ModelParams& par, const NoiseParams& noise,
                         const WienerPath& path,
                         std::span<const Controls> controls = {});

Trajectory simulate_path(const SimState& initial, const TimeGrid& grid,
                         const ModelParams& par, const NoiseParams& noise,
                         std::uint64_t seed,
                         std::span<const Controls> controls = {});

// Endpoint growth-rate estimate (1/(t_end-t0)) * ln((I+B)(t_end)/(I+B)(t0)).
// Requires I+B > 0 initially; returns nullopt when the path is extinct below
// resolution (I+B == 0 at t_end).
std::optional<double> lyapunov_estimate(const Trajectory& trajectory);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::int64_t> counts;
  double sample_mean = 0.0;
  double sample_stddev = 0.0;
  std::int64_t n_samples = 0;
};

struct RetentionPolicy {
  enum class Mode { StatsOnly, Thinned, All };
  Mode mode = Mode::StatsOnly;
  std::int64_t stride = 1;  // Thinned keeps paths k with k % stride == 0
  bool operator==(const RetentionPolicy&) const = default;
};

struct EnsembleOptions {
  std::int64_t n_paths = 500;
  std::uint64_t base_seed = 12345;
  double extinction_threshold = 0.01;  // on max(I, B) at t_end
  double tail_fraction = 0.5;          // window for the stationary S stats
  double time_avg_tail_fraction = 0.9; // window for time-averaged means
  int histogram_bins = 50;
  std::vector<double> quantile_probs = {0.05, 0.25, 0.5, 0.75, 0.95};
  int n_checkpoints = 101;
  RetentionPolicy retention;
  std::optional<double> feasible_n;      // diagnostic bound on S+I
  std::optional<double> feasible_b_max;  // diagnostic bound on B
};

struct EnsembleStats {
  TimeGrid grid;
  std::int64_t n_paths = 0;
  std::uint64_t base_seed = 0;

  std::vector<Vec3> mean;      // per grid point, components (S, I, B)
  std::vector<Vec3> variance;  // unbiased, per grid point

  std::vector<std::int64_t> checkpoints;  // grid indices
  std::vector<double> quantile_probs;
  // quantiles[c][component][q] at checkpoint c
  std::vector<std::array<std::vector<double>, 3>> quantiles;

  double extinction_threshold = 0.01;
  double extinction_probability = 0.0;
  std::int64_t extinct_paths = 0;

  // Per-path endpoint estimates; NaN marks paths extinct below resolution.
  std::vector<double> lyapunov;
  double lyapunov_mean = 0.0;
  double lyapunov_max = 0.0;
  std::int64_t lyapunov_valid_paths = 0;
  std::int64_t lyapunov_extinct_paths = 0;

  Histogram s_histogram;  // S over the final tail_fraction of each path
  double tail_fraction = 0.5;

  Vec3 time_avg_tail{};  // time average of the mean curve over the tail
  double time_avg_tail_fraction = 0.9;

  std::vector<SimState> terminal_states;

  std::int64_t clamp_events_total = 0;
  double max_clamp_fraction = 0.0;  // per-path clamp events / n_steps
  bool resolution_warning = false;  // max_clamp_fraction > 1%

  std::int64_t feasible_violation_paths = 0;

  std::vector<Trajectory> retained;
  std::vector<std::int64_t> retained_path_indices;
};

// Runs n_paths independent paths (path k seeded from (base_seed, k)) and
// aggregates the statistics.  Statistics are accumulated with pairwise-
// mergeable moment accumulators, so the result does not depend on path order.
EnsembleStats run_ensemble(const SimState& initial, const TimeGrid& grid,
                           const ModelParams& par, const NoiseParams& noise,
                           const EnsembleOptions& opts,
                           std::span<const Controls> controls = {});

// Rebins S over the final tail_fraction of each retained trajectory.
// Requires a non-empty retention and tail_fraction in (0, 1].
Histogram stationary_s_histogram(const EnsembleStats& stats,
                                 double tail_fraction);

struct ConvergenceResult {
  std::vector<double> dts;     // measured levels, coarse to fine
  std::vector<double> errors;  // E|X_level(T) - X_ref(T)| per level
  double observed_order = 0.0; // least-squares slope of ln(err) vs ln(dt)
};

// Strong self-convergence of the scheme under dt halving.  All levels reuse
// one underlying Wiener path per sample: coarse increments are sums of the
// finest-level increments.  The reference lies extra_ref_halvings below the
// finest measured level so the order fit is not biased by the reference.
ConvergenceResult self_convergence(const SimState& initial,
                                   const ModelParams& par,
                                   const NoiseParams& noise,
                                   const TimeGrid& grid_coarse, int n_levels,
                                   std::int64_t n_paths, std::uint64_t seed,
                                   int extra_ref_halvings = 3);

}  // namespace whsde
