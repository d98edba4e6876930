#include "whsde/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace whsde {

void TimeGrid::validate() const {
  if (!std::isfinite(t0)) {
    throw std::invalid_argument("grid.t0 must be finite");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("grid.dt must be strictly positive");
  }
  if (n_steps < 1) {
    throw std::invalid_argument("grid.n_steps must be at least 1");
  }
}

TimeGrid TimeGrid::from_duration(double t0, double t_end, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("grid.dt must be strictly positive");
  }
  if (!(t_end > t0)) {
    throw std::invalid_argument("grid.t_end must exceed grid.t0");
  }
  TimeGrid g;
  g.t0 = t0;
  g.dt = dt;
  g.n_steps = std::llround((t_end - t0) / dt);
  if (g.n_steps < 1) g.n_steps = 1;
  g.validate();
  return g;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_path_seed(std::uint64_t base_seed, std::uint64_t k) {
  const std::uint64_t mixed_base = splitmix64(base_seed ^ 0x6a09e667f3bcc909ULL);
  return splitmix64(mixed_base + (k + 1) * 0x9e3779b97f4a7c15ULL);
}

WienerPath wiener_path(const TimeGrid& grid, std::uint64_t seed) {
  grid.validate();
  WienerPath path;
  path.seed = seed;
  path.increments.resize(static_cast<std::size_t>(grid.n_steps));
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sqrt_dt = std::sqrt(grid.dt);
  for (auto& inc : path.increments) {
    inc[0] = normal(engine) * sqrt_dt;
    inc[1] = normal(engine) * sqrt_dt;
  }
  return path;
}

}  // namespace whsde
