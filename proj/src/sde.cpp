#include "whsde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace whsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double clamp_at_zero(double v, int& clamps) {
  if (v < 0.0) {
    ++clamps;
    return 0.0;
  }
  return v;
}

// First grid index of the window covering the final `fraction` of the grid.
std::int64_t tail_start_index(const TimeGrid& grid, double fraction) {
  const auto skipped = static_cast<std::int64_t>(
      std::floor((1.0 - fraction) * static_cast<double>(grid.n_steps)));
  return std::clamp<std::int64_t>(skipped, 0, grid.n_steps);
}

// Linear-interpolation quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) return kNaN;
  if (sorted.size() == 1) return sorted.front();
  const double h = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double w = h - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

Histogram bin_samples(const std::vector<double>& samples, int bins) {
  Histogram h;
  h.n_samples = static_cast<std::int64_t>(samples.size());
  if (samples.empty()) return h;
  double sum = 0.0, sumsq = 0.0;
  double lo = samples.front(), hi = samples.front();
  for (double v : samples) {
    sum += v;
    sumsq += v * v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double n = static_cast<double>(samples.size());
  h.sample_mean = sum / n;
  const double var =
      samples.size() > 1
          ? std::max(0.0, (sumsq - n * h.sample_mean * h.sample_mean) / (n - 1))
          : 0.0;
  h.sample_stddev = std::sqrt(var);
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(static_cast<std::size_t>(std::max(bins, 1)), 0);
  const double width = (hi - lo) / static_cast<double>(h.counts.size());
  for (double v : samples) {
    std::size_t idx = 0;
    if (width > 0.0) {
      idx = std::min(static_cast<std::size_t>((v - lo) / width),
                     h.counts.size() - 1);
    }
    ++h.counts[idx];
  }
  return h;
}

}  // namespace

StepResult em_step(const SimState& x, const Controls* u,
                   const ModelParams& par, const NoiseParams& noise,
                   double dw1, double dw2, double dt) {
  const Vec3 f = u ? controlled_drift(x, *u, par) : drift(x, par);
  const Vec3 g = diffusion(x, noise);
  StepResult out{};
  out.clamp_events = 0;
  out.state.s = clamp_at_zero(x.s + f[0] * dt + g[0] * dw1, out.clamp_events);
  out.state.i = clamp_at_zero(x.i + f[1] * dt + g[1] * dw1, out.clamp_events);
  out.state.b = clamp_at_zero(x.b + f[2] * dt + g[2] * dw2, out.clamp_events);
  return out;
}

Trajectory simulate_path(const SimState& initial, const TimeGrid& grid,
                         const ModelParams& par, const NoiseParams& noise,
                         const WienerPath& path,
                         std::span<const Controls> controls) {
  grid.validate();
  if (!(initial.s >= 0.0) || !(initial.i >= 0.0) || !(initial.b >= 0.0)) {
    throw std::invalid_argument("initial state must be non-negative");
  }
  if (path.increments.size() != static_cast<std::size_t>(grid.n_steps)) {
    throw std::invalid_argument("Wiener path length does not match the grid");
  }
  if (!controls.empty() &&
      controls.size() != static_cast<std::size_t>(grid.n_steps + 1)) {
    throw std::invalid_argument(
        "control field length does not match the grid");
  }
  Trajectory tr;
  tr.grid = grid;
  tr.states.resize(static_cast<std::size_t>(grid.n_steps + 1));
  tr.states[0] = initial;
  tr.clamp_events = 0;
  for (std::int64_t k = 0; k < grid.n_steps; ++k) {
    const auto& dw = path.increments[static_cast<std::size_t>(k)];
    const Controls* u =
        controls.empty() ? nullptr : &controls[static_cast<std::size_t>(k)];
    const StepResult step =
        em_step(tr.states[static_cast<std::size_t>(k)], u, par, noise, dw[0],
                dw[1], grid.dt);
    tr.states[static_cast<std::size_t>(k + 1)] = step.state;
    tr.clamp_events += step.clamp_events;
  }
  return tr;
}

Trajectory simulate_path(const SimState& initial, const TimeGrid& grid,
                         const ModelParams& par, const NoiseParams& noise,
                         std::uint64_t seed,
                         std::span<const Controls> controls) {
  return simulate_path(initial, grid, par, noise, wiener_path(grid, seed),
                       controls);
}

std::optional<double> lyapunov_estimate(const Trajectory& trajectory) {
  if (trajectory.states.empty()) {
    throw std::invalid_argument("empty trajectory");
  }
  const double v0 = trajectory.states.front().i + trajectory.states.front().b;
  if (!(v0 > 0.0)) {
    throw std::domain_error("lyapunov_estimate requires I+B > 0 at t0");
  }
  const double vT = trajectory.states.back().i + trajectory.states.back().b;
  if (!(vT > 0.0)) {
    return std::nullopt;  // extinct below resolution
  }
  const double horizon = trajectory.grid.t_end() - trajectory.grid.t0;
  return std::log(vT / v0) / horizon;
}

EnsembleStats run_ensemble(const SimState& initial, const TimeGrid& grid,
                           const ModelParams& par, const NoiseParams& noise,
                           const EnsembleOptions& opts,
                           std::span<const Controls> controls) {
  grid.validate();
  if (opts.n_paths < 1) {
    throw std::invalid_argument("n_paths must be at least 1");
  }
  if (!(opts.tail_fraction > 0.0) || opts.tail_fraction > 1.0) {
    throw std::invalid_argument("tail_fraction must lie in (0, 1]");
  }

  const auto n_points = static_cast<std::size_t>(grid.n_steps + 1);
  EnsembleStats stats;
  stats.grid = grid;
  stats.n_paths = opts.n_paths;
  stats.base_seed = opts.base_seed;
  stats.extinction_threshold = opts.extinction_threshold;
  stats.tail_fraction = opts.tail_fraction;
  stats.time_avg_tail_fraction = opts.time_avg_tail_fraction;
  stats.quantile_probs = opts.quantile_probs;

  // Welford moment accumulators (mergeable pairwise): exact zero variance
  // when every path coincides.
  std::vector<Vec3> running_mean(n_points, Vec3{0, 0, 0});
  std::vector<Vec3> m2(n_points, Vec3{0, 0, 0});

  const int n_checkpoints =
      static_cast<int>(std::min<std::int64_t>(opts.n_checkpoints,
                                              grid.n_steps + 1));
  for (int j = 0; j < n_checkpoints; ++j) {
    const auto idx = static_cast<std::int64_t>(std::llround(
        static_cast<double>(j) * static_cast<double>(grid.n_steps) /
        static_cast<double>(std::max(n_checkpoints - 1, 1))));
    if (stats.checkpoints.empty() || stats.checkpoints.back() != idx) {
      stats.checkpoints.push_back(idx);
    }
  }
  std::vector<std::array<std::vector<double>, 3>> checkpoint_values(
      stats.checkpoints.size());
  for (auto& cv : checkpoint_values) {
    for (auto& c : cv) c.reserve(static_cast<std::size_t>(opts.n_paths));
  }

  const std::int64_t tail_k0 = tail_start_index(grid, opts.tail_fraction);
  const std::int64_t tail_len = grid.n_steps + 1 - tail_k0;
  const std::int64_t hist_stride = std::max<std::int64_t>(1, tail_len / 200);
  std::vector<double> tail_s;
  tail_s.reserve(static_cast<std::size_t>(
      opts.n_paths * (tail_len / hist_stride + 1)));

  stats.lyapunov.reserve(static_cast<std::size_t>(opts.n_paths));
  stats.terminal_states.reserve(static_cast<std::size_t>(opts.n_paths));
  const bool lyapunov_defined = initial.i + initial.b > 0.0;
  double lyap_sum = 0.0;
  double lyap_max = -std::numeric_limits<double>::infinity();

  for (std::int64_t k = 0; k < opts.n_paths; ++k) {
    const std::uint64_t seed =
        derive_path_seed(opts.base_seed, static_cast<std::uint64_t>(k));
    Trajectory tr = simulate_path(initial, grid, par, noise, seed, controls);

    const double n_seen = static_cast<double>(k + 1);
    for (std::size_t j = 0; j < n_points; ++j) {
      const SimState& x = tr.states[j];
      const Vec3 values{x.s, x.i, x.b};
      for (std::size_t c = 0; c < 3; ++c) {
        const double delta = values[c] - running_mean[j][c];
        running_mean[j][c] += delta / n_seen;
        m2[j][c] += delta * (values[c] - running_mean[j][c]);
      }
    }
    for (std::size_t c = 0; c < stats.checkpoints.size(); ++c) {
      const SimState& x =
          tr.states[static_cast<std::size_t>(stats.checkpoints[c])];
      checkpoint_values[c][0].push_back(x.s);
      checkpoint_values[c][1].push_back(x.i);
      checkpoint_values[c][2].push_back(x.b);
    }
    for (std::int64_t j = tail_k0; j <= grid.n_steps; j += hist_stride) {
      tail_s.push_back(tr.states[static_cast<std::size_t>(j)].s);
    }

    const SimState& last = tr.states.back();
    stats.terminal_states.push_back(last);
    if (std::max(last.i, last.b) < opts.extinction_threshold) {
      ++stats.extinct_paths;
    }
    if (lyapunov_defined) {
      const auto lyap = lyapunov_estimate(tr);
      if (lyap) {
        stats.lyapunov.push_back(*lyap);
        lyap_sum += *lyap;
        lyap_max = std::max(lyap_max, *lyap);
        ++stats.lyapunov_valid_paths;
      } else {
        stats.lyapunov.push_back(kNaN);
        ++stats.lyapunov_extinct_paths;
      }
    }

    stats.clamp_events_total += tr.clamp_events;
    stats.max_clamp_fraction =
        std::max(stats.max_clamp_fraction,
                 static_cast<double>(tr.clamp_events) /
                     static_cast<double>(grid.n_steps));

    if (opts.feasible_n || opts.feasible_b_max) {
      bool violated = false;
      for (const SimState& x : tr.states) {
        if (opts.feasible_n && x.s + x.i > *opts.feasible_n) violated = true;
        if (opts.feasible_b_max && x.b > *opts.feasible_b_max) violated = true;
        if (violated) break;
      }
      if (violated) ++stats.feasible_violation_paths;
    }

    const bool keep =
        opts.retention.mode == RetentionPolicy::Mode::All ||
        (opts.retention.mode == RetentionPolicy::Mode::Thinned &&
         k % std::max<std::int64_t>(opts.retention.stride, 1) == 0);
    if (keep) {
      stats.retained_path_indices.push_back(k);
      stats.retained.push_back(std::move(tr));
    }
  }

  const double n = static_cast<double>(opts.n_paths);
  stats.mean = std::move(running_mean);
  stats.variance.resize(n_points);
  for (std::size_t j = 0; j < n_points; ++j) {
    for (std::size_t c = 0; c < 3; ++c) {
      stats.variance[j][c] =
          opts.n_paths > 1 ? std::max(0.0, m2[j][c] / (n - 1.0)) : 0.0;
    }
  }

  stats.quantiles.resize(stats.checkpoints.size());
  for (std::size_t c = 0; c < stats.checkpoints.size(); ++c) {
    for (int comp = 0; comp < 3; ++comp) {
      auto& values = checkpoint_values[c][static_cast<std::size_t>(comp)];
      std::sort(values.begin(), values.end());
      auto& out = stats.quantiles[c][static_cast<std::size_t>(comp)];
      out.reserve(opts.quantile_probs.size());
      for (double prob : opts.quantile_probs) {
        out.push_back(quantile_sorted(values, prob));
      }
    }
  }

  stats.extinction_probability =
      static_cast<double>(stats.extinct_paths) / n;
  if (stats.lyapunov_valid_paths > 0) {
    stats.lyapunov_mean =
        lyap_sum / static_cast<double>(stats.lyapunov_valid_paths);
    stats.lyapunov_max = lyap_max;
  } else {
    stats.lyapunov_mean = kNaN;
    stats.lyapunov_max = kNaN;
  }

  stats.s_histogram = bin_samples(tail_s, opts.histogram_bins);
  stats.resolution_warning = stats.max_clamp_fraction > 0.01;

  const std::int64_t avg_k0 =
      tail_start_index(grid, opts.time_avg_tail_fraction);
  Vec3 avg{0, 0, 0};
  for (std::int64_t j = avg_k0; j <= grid.n_steps; ++j) {
    for (int c = 0; c < 3; ++c) {
      avg[static_cast<std::size_t>(c)] +=
          stats.mean[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
    }
  }
  const double avg_len = static_cast<double>(grid.n_steps + 1 - avg_k0);
  for (int c = 0; c < 3; ++c) {
    stats.time_avg_tail[static_cast<std::size_t>(c)] =
        avg[static_cast<std::size_t>(c)] / avg_len;
  }

  return stats;
}

Histogram stationary_s_histogram(const EnsembleStats& stats,
                                 double tail_fraction) {
  if (stats.retained.empty()) {
    throw std::invalid_argument(
        "stationary_s_histogram requires retained trajectories");
  }
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
    throw std::invalid_argument("tail_fraction must lie in (0, 1]");
  }
  std::vector<double> samples;
  for (const Trajectory& tr : stats.retained) {
    const std::int64_t k0 = tail_start_index(tr.grid, tail_fraction);
    for (std::int64_t j = k0; j <= tr.grid.n_steps; ++j) {
      samples.push_back(tr.states[static_cast<std::size_t>(j)].s);
    }
  }
  const int bins = stats.s_histogram.counts.empty()
                       ? 50
                       : static_cast<int>(stats.s_histogram.counts.size());
  return bin_samples(samples, bins);
}

ConvergenceResult self_convergence(const SimState& initial,
                                   const ModelParams& par,
                                   const NoiseParams& noise,
                                   const TimeGrid& grid_coarse, int n_levels,
                                   std::int64_t n_paths, std::uint64_t seed,
                                   int extra_ref_halvings) {
  grid_coarse.validate();
  if (n_levels < 1) {
    throw std::invalid_argument("n_levels must be at least 1");
  }
  if (extra_ref_halvings < 0) {
    throw std::invalid_argument("extra_ref_halvings must be non-negative");
  }
  const int total_levels = n_levels + extra_ref_halvings;
  TimeGrid fine = grid_coarse;
  fine.dt = grid_coarse.dt / static_cast<double>(1LL << (total_levels - 1));
  fine.n_steps = grid_coarse.n_steps * (1LL << (total_levels - 1));

  ConvergenceResult result;
  result.dts.resize(static_cast<std::size_t>(n_levels));
  result.errors.assign(static_cast<std::size_t>(n_levels), 0.0);
  for (int lev = 0; lev < n_levels; ++lev) {
    result.dts[static_cast<std::size_t>(lev)] =
        grid_coarse.dt / static_cast<double>(1LL << lev);
  }

  WienerPath level_path;
  for (std::int64_t k = 0; k < n_paths; ++k) {
    const WienerPath fine_path = wiener_path(
        fine, derive_path_seed(seed, static_cast<std::uint64_t>(k)));
    const SimState ref =
        simulate_path(initial, fine, par, noise, fine_path).states.back();
    for (int lev = 0; lev < n_levels; ++lev) {
      const std::int64_t factor = 1LL << (total_levels - 1 - lev);
      TimeGrid grid_lev = grid_coarse;
      grid_lev.dt = result.dts[static_cast<std::size_t>(lev)];
      grid_lev.n_steps = grid_coarse.n_steps * (1LL << lev);
      level_path.seed = fine_path.seed;
      level_path.increments.assign(
          static_cast<std::size_t>(grid_lev.n_steps), {0.0, 0.0});
      for (std::int64_t j = 0; j < fine.n_steps; ++j) {
        auto& agg = level_path.increments[static_cast<std::size_t>(j / factor)];
        agg[0] += fine_path.increments[static_cast<std::size_t>(j)][0];
        agg[1] += fine_path.increments[static_cast<std::size_t>(j)][1];
      }
      const SimState x =
          simulate_path(initial, grid_lev, par, noise, level_path)
              .states.back();
      const double ds = x.s - ref.s;
      const double di = x.i - ref.i;
      const double db = x.b - ref.b;
      result.errors[static_cast<std::size_t>(lev)] +=
          std::sqrt(ds * ds + di * di + db * db);
    }
  }
  for (double& e : result.errors) e /= static_cast<double>(n_paths);

  // Least-squares slope of ln(error) against ln(dt), positive errors only.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int lev = 0; lev < n_levels; ++lev) {
    const double err = result.errors[static_cast<std::size_t>(lev)];
    if (!(err > 0.0)) continue;
    const double x = std::log(result.dts[static_cast<std::size_t>(lev)]);
    const double y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  result.observed_order =
      m >= 2 ? (static_cast<double>(m) * sxy - sx * sy) /
                   (static_cast<double>(m) * sxx - sx * sx)
             : kNaN;
  return result;
}

}  // namespace whsde
