#pragma once

#include <array>
#include <optional>

namespace whsde {

using Vec3 = std::array<double, 3>;

// Within-host compartment model with environmental noise on the mortality
// rates.  State x = (S, I, B): susceptible cells, infected cells, viral load.
//
//   dS = (omega - beta*S*B - mu*S) dt          - sigma1*S dW1
//   dI = (beta*S*B - p*I - mu*I) dt            - sigma1*I dW1
//   dB = (alpha*I - q*B - mu1*B) dt            - sigma2*B dW2
//
// S and I share the Wiener channel W1 (their mortality is perturbed by the
// same environmental factors); B is driven by the independent channel W2.

struct ModelParams {
  double omega;  // birth rate of susceptible cells [cells/day]
  double beta;   // transmission rate [1/(virion day)]
  double mu;     // natural cell death rate [1/day]
  double mu1;    // natural virion death rate [1/day]
  double alpha;  // virion burst rate [1/day]
  double p;      // immune clearance rate of infected cells [1/day]
  double q;      // immune clearance rate of virions [1/day]

  // All seven rates must be strictly positive.
  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

struct NoiseParams {
  double sigma1;  // intensity on cell mortality [1/sqrt(day)]
  double sigma2;  // intensity on virion mortality [1/sqrt(day)]

  // Non-negative; (0, 0) recovers the deterministic system.
  void validate() const;
  bool operator==(const NoiseParams&) const = default;
};

struct SimState {
  double s;
  double i;
  double b;
  bool operator==(const SimState&) const = default;
};

// Dosing rates of the three interventions.  u11 stimulates the innate
// response (clears infected cells), u12 enhances the B/T-cell response
// (clears virions), u2 blocks viral replication.  All in [1/day].
struct Controls {
  double u11;
  double u12;
  double u2;
  bool operator==(const Controls&) const = default;
};

struct DeterministicSummary {
  double r0;                   // basic reproduction number
  SimState e0;                 // infection-free equilibrium (omega/mu, 0, 0)
  std::optional<SimState> e1;  // infected equilibrium, present iff r0 > 1
};

// Wiener channel index driving each component: (W1, W1, W2).
inline constexpr std::array<int, 3> kDiffusionChannel{0, 0, 1};

Vec3 drift(const SimState& x, const ModelParams& par);
Vec3 diffusion(const SimState& x, const NoiseParams& noise);

// Drift of the controlled system.  Zero controls reduce to drift() exactly.
// Rejects negative or non-finite control values.
Vec3 controlled_drift(const SimState& x, const Controls& u,
                      const ModelParams& par);

// R0 = beta*alpha*omega / (mu*(p+mu)*(q+mu1)).
double reproduction_number(const ModelParams& par);

DeterministicSummary equilibria(const ModelParams& par);

// 2(u + 1 - ln u) - (4 - 2 ln 2) - u.  Non-negative for all u > 0 with its
// unique zero at u = 2; rejects u <= 0.
double lemma_gap(double u);

}  // namespace whsde
