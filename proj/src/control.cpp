#include "whsde/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace whsde {

namespace {

double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace

void ControlWeights::validate() const {
  if (!(a1 > 0.0) || !(a2 > 0.0)) {
    throw std::invalid_argument("effort weights a1, a2 must be positive");
  }
  if (!(u11_max > 0.0) || !(u12_max > 0.0) || !(u2_max > 0.0)) {
    throw std::invalid_argument("control maxima must be positive");
  }
}

void ControlField::validate(const ControlWeights& w) const {
  grid.validate();
  if (values.size() != static_cast<std::size_t>(grid.n_steps + 1)) {
    throw std::invalid_argument("control field length does not match grid");
  }
  for (const Controls& u : values) {
    if (u.u11 < 0.0 || u.u11 > w.u11_max || u.u12 < 0.0 ||
        u.u12 > w.u12_max || u.u2 < 0.0 || u.u2 > w.u2_max) {
      throw std::invalid_argument("control value outside admissible box");
    }
  }
}

double running_cost(const SimState& x, const Controls& u,
                    const ControlWeights& w) {
  return x.i + x.b + w.a1 * (u.u11 * u.u11 + u.u12 * u.u12) +
         w.a2 * u.u2 * u.u2;
}

double hamiltonian(const SimState& x, const Controls& u,
                   const AdjointState& adj, const ModelParams& par,
                   const NoiseParams& noise, const ControlWeights& w) {
  return dot(controlled_drift(x, u, par), adj.m) + running_cost(x, u, w) +
         dot(diffusion(x, noise), adj.n);
}

AdjointState adjoint_step_backward(const AdjointState& adj, const SimState& x,
                                   const Controls& u, const ModelParams& par,
                                   const NoiseParams& noise, double dw1,
                                   double dw2, double dt) {
  const double m1 = adj.m[0], m2 = adj.m[1], m3 = adj.m[2];
  const double n1 = adj.n[0], n2 = adj.n[1], n3 = adj.n[2];
  const double dm1 =
      m1 * (par.beta * x.b + par.mu) - m2 * par.beta * x.b + noise.sigma1 * n1;
  const double dm2 = m2 * (par.p + u.u11 + par.mu) -
                     m3 * (par.alpha - u.u2) + noise.sigma1 * n2 - 1.0;
  const double dm3 = m1 * par.beta * x.s - m2 * par.beta * x.s +
                     m3 * (par.q + par.mu1 + u.u12) + noise.sigma2 * n3 - 1.0;
  AdjointState out;
  out.m = {m1 - dm1 * dt - n1 * dw1, m2 - dm2 * dt - n2 * dw1,
           m3 - dm3 * dt - n3 * dw2};
  out.n = adj.n;
  return out;
}

Controls optimal_controls_pointwise(const SimState& x, const AdjointState& adj,
                                    const ControlWeights& w) {
  return {clamp(adj.m[1] * x.i / (2.0 * w.a1), 0.0, w.u11_max),
          clamp(adj.m[2] * x.b / (2.0 * w.a1), 0.0, w.u12_max),
          clamp(adj.m[2] * x.i / (2.0 * w.a2), 0.0, w.u2_max)};
}

SweepResult forward_backward_sweep(const SimState& initial,
                                   const TimeGrid& grid,
                                   const ModelParams& par,
                                   const NoiseParams& noise,
                                   const ControlWeights& w,
                                   const Vec3& adjoint_n,
                                   const SweepSettings& settings,
                                   std::uint64_t base_seed,
                                   const ControlField* warm_start) {
  grid.validate();
  w.validate();
  if (!(settings.theta > 0.0) || settings.theta > 1.0) {
    throw std::invalid_argument("theta must lie in (0, 1]");
  }
  if (settings.n_paths < 1 || settings.max_iterations < 1) {
    throw std::invalid_argument("n_paths and max_iterations must be positive");
  }

  const auto n_paths = static_cast<std::size_t>(settings.n_paths);
  const auto n_points = static_cast<std::size_t>(grid.n_steps + 1);

  // Frozen Wiener bundle, shared by every iteration.
  std::vector<WienerPath> bundle;
  bundle.reserve(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) {
    bundle.push_back(
        wiener_path(grid, derive_path_seed(base_seed, k)));
  }

  std::vector<Controls> u(n_points, Controls{0.0, 0.0, 0.0});
  if (warm_start != nullptr) {
    if (warm_start->grid != grid) {
      throw std::invalid_argument("warm start field is on a different grid");
    }
    warm_start->validate(w);
    u = warm_start->values;
  }
  std::vector<std::vector<SimState>> states(
      n_paths, std::vector<SimState>(n_points));
  std::vector<SimState> state_mean(n_points);
  std::vector<Vec3> adjoint_mean(n_points);

  const double inv_n = 1.0 / static_cast<double>(n_paths);

  auto forward_pass = [&]() {
    for (std::size_t k = 0; k < n_paths; ++k) {
      Trajectory tr = simulate_path(initial, grid, par, noise, bundle[k], u);
      states[k] = std::move(tr.states);
    }
    for (std::size_t j = 0; j < n_points; ++j) {
      double s = 0, i = 0, b = 0;
      for (std::size_t k = 0; k < n_paths; ++k) {
        s += states[k][j].s;
        i += states[k][j].i;
        b += states[k][j].b;
      }
      state_mean[j] = {s * inv_n, i * inv_n, b * inv_n};
    }
  };

  auto backward_pass = [&]() {
    std::fill(adjoint_mean.begin(), adjoint_mean.end(), Vec3{0, 0, 0});
    for (std::size_t k = 0; k < n_paths; ++k) {
      AdjointState adj;
      adj.n = adjoint_n;  // m starts at the terminal condition m(T) = 0
      for (std::int64_t j = grid.n_steps - 1; j >= 0; --j) {
        const auto jj = static_cast<std::size_t>(j);
        const auto& dw = bundle[k].increments[jj];
        adj = adjoint_step_backward(adj, states[k][jj + 1], u[jj + 1], par,
                                    noise, dw[0], dw[1], grid.dt);
        adjoint_mean[jj][0] += adj.m[0] * inv_n;
        adjoint_mean[jj][1] += adj.m[1] * inv_n;
        adjoint_mean[jj][2] += adj.m[2] * inv_n;
      }
    }
  };

  SweepResult result;
  result.converged = false;
  int it = 0;
  while (it < settings.max_iterations) {
    ++it;
    forward_pass();
    backward_pass();

    double max_new = 0.0;
    double max_change = 0.0;
    for (std::size_t j = 0; j < n_points; ++j) {
      const SimState mean_x = state_mean[j];
      AdjointState adj;
      adj.m = adjoint_mean[j];
      Controls uf = optimal_controls_pointwise(mean_x, adj, w);
      if (!settings.active[0]) uf.u11 = 0.0;
      if (!settings.active[1]) uf.u12 = 0.0;
      if (!settings.active[2]) uf.u2 = 0.0;
      const Controls un{
          settings.theta * uf.u11 + (1.0 - settings.theta) * u[j].u11,
          settings.theta * uf.u12 + (1.0 - settings.theta) * u[j].u12,
          settings.theta * uf.u2 + (1.0 - settings.theta) * u[j].u2};
      max_change = std::max({max_change, std::abs(un.u11 - u[j].u11),
                             std::abs(un.u12 - u[j].u12),
                             std::abs(un.u2 - u[j].u2)});
      max_new = std::max({max_new, un.u11, un.u12, un.u2});
      u[j] = un;
    }
    const double rel_change = max_change / std::max(1.0, max_new);
    result.convergence_history.push_back(rel_change);
    if (rel_change < settings.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.iterations = it;

  // Final pass with the accepted field: reported statistics and cost.
  forward_pass();
  backward_pass();
  result.control.grid = grid;
  result.control.values = u;
  result.state_mean = state_mean;
  result.adjoint_mean = adjoint_mean;
  result.adjoint_mean[static_cast<std::size_t>(grid.n_steps)] = {0, 0, 0};

  result.per_path_cost.resize(n_paths);
  result.terminal_b.resize(n_paths);
  double cost_sum = 0.0, cost_sumsq = 0.0;
  for (std::size_t k = 0; k < n_paths; ++k) {
    double j_k = 0.0;
    for (std::int64_t j = 0; j < grid.n_steps; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      j_k += running_cost(states[k][jj], u[jj], w) * grid.dt;
    }
    result.per_path_cost[k] = j_k;
    result.terminal_b[k] = states[k].back().b;
    cost_sum += j_k;
    cost_sumsq += j_k * j_k;
  }
  result.cost = cost_sum * inv_n;
  if (n_paths > 1) {
    const double var = std::max(
        0.0, (cost_sumsq - static_cast<double>(n_paths) * result.cost *
                               result.cost) /
                 (static_cast<double>(n_paths) - 1.0));
    result.cost_se = std::sqrt(var / static_cast<double>(n_paths));
  }
  return result;
}

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::None: return "none";
    case Scenario::ImmunoOnly: return "immuno_only";
    case Scenario::AntiviralOnly: return "antiviral_only";
    case Scenario::Combined: return "combined";
  }
  return "unknown";
}

std::optional<Scenario> scenario_from_name(std::string_view name) {
  if (name == "none") return Scenario::None;
  if (name == "immuno_only") return Scenario::ImmunoOnly;
  if (name == "antiviral_only") return Scenario::AntiviralOnly;
  if (name == "combined") return Scenario::Combined;
  return std::nullopt;
}

std::vector<ScenarioOutcome> scenario_compare(
    const SimState& initial, const TimeGrid& grid, const ModelParams& par,
    const NoiseParams& noise, const ControlWeights& w, const Vec3& adjoint_n,
    const SweepSettings& settings, const std::vector<Scenario>& scenarios,
    std::uint64_t base_seed) {
  if (scenarios.empty()) {
    throw std::invalid_argument("scenario list must be non-empty");
  }
  std::vector<ScenarioOutcome> outcomes;
  outcomes.reserve(scenarios.size());
  for (Scenario sc : scenarios) {
    SweepSettings s = settings;
    switch (sc) {
      case Scenario::None: s.active = {false, false, false}; break;
      case Scenario::ImmunoOnly: s.active = {true, true, false}; break;
      case Scenario::AntiviralOnly: s.active = {false, false, true}; break;
      case Scenario::Combined: s.active = {true, true, true}; break;
    }
    ScenarioOutcome out;
    out.scenario = sc;
    if (sc == Scenario::None) {
      // Zero-control baseline: the sweep's first forward pass, so a single
      // iteration with zero tolerance pressure.
      s.max_iterations = 1;
      SweepResult res = forward_backward_sweep(initial, grid, par, noise, w,
                                               adjoint_n, s, base_seed);
      out.cost = res.cost;
      out.cost_se = res.cost_se;
      out.per_path_cost = std::move(res.per_path_cost);
      out.terminal_b = std::move(res.terminal_b);
      out.mean_i.reserve(res.state_mean.size());
      out.mean_b.reserve(res.state_mean.size());
      for (const SimState& x : res.state_mean) {
        out.mean_i.push_back(x.i);
        out.mean_b.push_back(x.b);
      }
    } else {
      SweepResult res = forward_backward_sweep(initial, grid, par, noise, w,
                                               adjoint_n, s, base_seed);
      out.cost = res.cost;
      out.cost_se = res.cost_se;
      out.per_path_cost = res.per_path_cost;
      out.terminal_b = res.terminal_b;
      out.mean_i.reserve(res.state_mean.size());
      out.mean_b.reserve(res.state_mean.size());
      for (const SimState& x : res.state_mean) {
        out.mean_i.push_back(x.i);
        out.mean_b.push_back(x.b);
      }
      out.sweep = std::move(res);
    }
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

}  // namespace whsde
