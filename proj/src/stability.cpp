#include "whsde/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace whsde {

namespace {

// Shared left-hand side of conditions A and B; equals the off-diagonal b.
double coupling(const ModelParams& par) {
  return par.alpha + par.beta * par.omega / par.mu - par.p - par.mu - par.q -
         par.mu1;
}

}  // namespace

ConditionVerdict condition_a(const ModelParams& par,
                             const NoiseParams& noise) {
  const double lhs = coupling(par);
  const double rhs =
      0.5 * (noise.sigma1 * noise.sigma1 + noise.sigma2 * noise.sigma2);
  return {lhs, rhs, lhs < rhs};
}

ConditionVerdict condition_b(const ModelParams& par,
                             const NoiseParams& noise) {
  const StabilityMatrix m = stability_matrix(par, noise);
  const double lhs = coupling(par);
  const double rhs = m.d1 * m.d2;
  return {lhs, rhs, lhs < rhs};
}

StabilityMatrix stability_matrix(const ModelParams& par,
                                 const NoiseParams& noise) {
  StabilityMatrix m;
  m.d1 = 2.0 * (par.alpha - par.p - par.mu) - noise.sigma1 * noise.sigma1;
  m.d2 = 2.0 * par.beta * par.omega / par.mu - 2.0 * (par.q + par.mu1) -
         noise.sigma2 * noise.sigma2;
  m.b = coupling(par);
  return m;
}

std::array<double, 2> eigen2(const StabilityMatrix& m) {
  const double h = 0.5 * (m.d1 + m.d2);
  const double half_gap = 0.5 * (m.d1 - m.d2);
  const double disc = half_gap * half_gap + m.b * m.b;
  const double r = std::sqrt(std::max(disc, 0.0));
  return {h - r, h + r};
}

StabilityReport stability_report(const ModelParams& par,
                                 const NoiseParams& noise, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw std::domain_error("epsilon must lie in (0, 1)");
  }
  StabilityReport rep;
  rep.condition_a = condition_a(par, noise);
  rep.condition_b = condition_b(par, noise);
  rep.matrix = stability_matrix(par, noise);
  rep.eigenvalues = eigen2(rep.matrix);
  rep.negative_definite = rep.eigenvalues[1] < 0.0;
  if (rep.negative_definite) {
    // lambda_max is the larger (least negative) eigenvalue.
    rep.decay_rate_bound = std::abs(rep.eigenvalues[1]) / 4.0;
  }
  rep.boundedness_limit = std::sqrt(3.0) * par.omega;
  rep.chebyshev_k = std::sqrt(3.0) * par.omega / epsilon;
  rep.permanence_h = par.omega / par.mu;
  rep.epsilon = epsilon;
  const bool printed_verdict = rep.condition_a.holds &&
                               rep.condition_b.holds && rep.matrix.d1 < 0.0 &&
                               rep.matrix.d2 < 0.0;
  rep.printed_conditions_disagree =
      printed_verdict != rep.negative_definite;
  return rep;
}

}  // namespace whsde
