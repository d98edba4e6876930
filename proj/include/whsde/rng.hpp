#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace whsde {

// Uniform grid t_k = t0 + k*dt, k = 0..n_steps.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.01;
  std::int64_t n_steps = 1;

  double t_end() const { return t0 + static_cast<double>(n_steps) * dt; }
  double time_at(std::int64_t k) const {
    return t0 + static_cast<double>(k) * dt;
  }
  void validate() const;  // dt > 0, n_steps >= 1, finite t0

  // n_steps is rounded from (t_end - t0)/dt; t_end snaps to the grid.
  static TimeGrid from_duration(double t0, double t_end, double dt);

  bool operator==(const TimeGrid&) const = default;
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed for path k of an ensemble.  Pure function of (base_seed, k), so
// ensembles are reproducible and independent of execution order.
std::uint64_t derive_path_seed(std::uint64_t base_seed, std::uint64_t k);

// Increments of the two Wiener channels over one grid: each entry is
// (dW1_k, dW2_k), independent N(0, dt) draws.  Deterministic in (grid, seed).
struct WienerPath {
  std::vector<std::array<double, 2>> increments;
  std::uint64_t seed = 0;
};

WienerPath wiener_path(const TimeGrid& grid, std::uint64_t seed);

}  // namespace whsde
