#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "whsde/model.hpp"
#include "whsde/sde.hpp"

namespace whsde {

struct ControlWeights {
  double a1;  // effort penalty on the immunomodulation pair (u11, u12)
  double a2;  // effort penalty on the antiviral u2
  double u11_max = 1.0;
  double u12_max = 1.0;
  double u2_max = 1.0;
  void validate() const;  // weights and maxima strictly positive
  bool operator==(const ControlWeights&) const = default;
};

// Deterministic control schedule on a grid; values[k] applies to step k.
struct ControlField {
  TimeGrid grid;
  std::vector<Controls> values;  // n_steps + 1 entries
  void validate(const ControlWeights& w) const;  // box constraints, exactly
  bool operator==(const ControlField&) const = default;
};

// Costate m propagates marginal cost backward from m(T) = 0; n holds the
// fixed diffusion coefficients of the adjoint noise terms.
struct AdjointState {
  Vec3 m{0.0, 0.0, 0.0};
  Vec3 n{0.0, 0.0, 0.0};
};

// I + B + a1*(u11^2 + u12^2) + a2*u2^2.
double running_cost(const SimState& x, const Controls& u,
                    const ControlWeights& w);

// H = <controlled drift, m> + running cost + <diffusion, n>.
double hamiltonian(const SimState& x, const Controls& u,
                   const AdjointState& adj, const ModelParams& par,
                   const NoiseParams& noise, const ControlWeights& w);

// One backward step of the adjoint system on the same Wiener increments as
// the forward path.  Drift evaluated at the later-time values (adj, x, u):
//   dm1 = [m1(beta x3 + mu) - m2 beta x3 + sigma1 n1] dt + n1 dW1
//   dm2 = [m2(p + u11 + mu) - m3(alpha - u2) + sigma1 n2 - 1] dt + n2 dW1
//   dm3 = [m1 beta x1 - m2 beta x1 + m3(q + mu1 + u12) + sigma2 n3 - 1] dt
//         + n3 dW2
AdjointState adjoint_step_backward(const AdjointState& adj, const SimState& x,
                                   const Controls& u, const ModelParams& par,
                                   const NoiseParams& noise, double dw1,
                                   double dw2, double dt);

// Minimizers of H over the admissible box (H is convex and separable in u):
//   u11* = clamp(m2 I / (2 a1), 0, u11_max)
//   u12* = clamp(m3 B / (2 a1), 0, u12_max)
//   u2*  = clamp(m3 I / (2 a2), 0, u2_max)
Controls optimal_controls_pointwise(const SimState& x, const AdjointState& adj,
                                    const ControlWeights& w);

struct SweepSettings {
  double theta = 0.5;      // relaxation of the control update, in (0, 1]
  double tolerance = 1e-3; // relative sup-norm change in controls
  int max_iterations = 100;
  std::int64_t n_paths = 200;  // frozen Wiener bundle / Monte-Carlo cost
  std::array<bool, 3> active{true, true, true};  // inactive controls held at 0
  bool operator==(const SweepSettings&) const = default;
};

struct SweepResult {
  ControlField control;
  std::vector<SimState> state_mean;   // ensemble mean under the final field
  std::vector<Vec3> adjoint_mean;     // ensemble mean costate, m(T) = 0
  double cost = 0.0;                  // Monte-Carlo estimate of J
  double cost_se = 0.0;
  std::vector<double> per_path_cost;
  std::vector<double> terminal_b;     // per-path B(t_end)
  int iterations = 0;
  std::vector<double> convergence_history;  // relative change per iteration
  bool converged = false;
};

// Forward-backward sweep on a frozen bundle of Wiener paths: forward EM with
// the current field, pathwise backward adjoint from m(T) = 0, then a relaxed
// pointwise update from the ensemble-mean state and costate.  Stops when the
// relative control change falls below tolerance; a result that exhausts
// max_iterations is returned flagged, with the last iterate retained.
// warm_start, when given, replaces the all-zero initial guess.
SweepResult forward_backward_sweep(const SimState& initial,
                                   const TimeGrid& grid,
                                   const ModelParams& par,
                                   const NoiseParams& noise,
                                   const ControlWeights& w,
                                   const Vec3& adjoint_n,
                                   const SweepSettings& settings,
                                   std::uint64_t base_seed,
                                   const ControlField* warm_start = nullptr);

enum class Scenario { None, ImmunoOnly, AntiviralOnly, Combined };

std::string_view scenario_name(Scenario s);
std::optional<Scenario> scenario_from_name(std::string_view name);

struct ScenarioOutcome {
  Scenario scenario;
  double cost = 0.0;
  double cost_se = 0.0;
  std::vector<double> per_path_cost;
  std::vector<double> mean_i;  // per grid point
  std::vector<double> mean_b;
  std::vector<double> terminal_b;
  std::optional<SweepResult> sweep;  // absent for Scenario::None
};

// Runs each scenario on the same Wiener bundle (common random numbers).
// Single-control scenarios hold the excluded controls at zero during the
// sweep; Scenario::None is a plain forward pass.
std::vector<ScenarioOutcome> scenario_compare(
    const SimState& initial, const TimeGrid& grid, const ModelParams& par,
    const NoiseParams& noise, const ControlWeights& w, const Vec3& adjoint_n,
    const SweepSettings& settings, const std::vector<Scenario>& scenarios,
    std::uint64_t base_seed);

}  // namespace whsde
