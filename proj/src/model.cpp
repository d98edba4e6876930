#include "whsde/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace whsde {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) +
                                " must be strictly positive and finite");
  }
}

}  // namespace

void ModelParams::validate() const {
  require_positive(omega, "omega");
  require_positive(beta, "beta");
  require_positive(mu, "mu");
  require_positive(mu1, "mu1");
  require_positive(alpha, "alpha");
  require_positive(p, "p");
  require_positive(q, "q");
}

void NoiseParams::validate() const {
  if (!(sigma1 >= 0.0) || !std::isfinite(sigma1)) {
    throw std::invalid_argument("sigma1 must be non-negative and finite");
  }
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("sigma2 must be non-negative and finite");
  }
}

Vec3 drift(const SimState& x, const ModelParams& par) {
  const double infection = par.beta * x.s * x.b;
  return {par.omega - infection - par.mu * x.s,
          infection - (par.p + par.mu) * x.i,
          par.alpha * x.i - (par.q + par.mu1) * x.b};
}

Vec3 diffusion(const SimState& x, const NoiseParams& noise) {
  return {-noise.sigma1 * x.s, -noise.sigma1 * x.i, -noise.sigma2 * x.b};
}

Vec3 controlled_drift(const SimState& x, const Controls& u,
                      const ModelParams& par) {
  if (!(u.u11 >= 0.0) || !(u.u12 >= 0.0) || !(u.u2 >= 0.0) ||
      !std::isfinite(u.u11) || !std::isfinite(u.u12) || !std::isfinite(u.u2)) {
    throw std::invalid_argument(
        "controls must be finite and non-negative");
  }
  const double infection = par.beta * x.s * x.b;
  return {par.omega - infection - par.mu * x.s,
          infection - (par.p + u.u11 + par.mu) * x.i,
          (par.alpha - u.u2) * x.i - (par.q + u.u12 + par.mu1) * x.b};
}

double reproduction_number(const ModelParams& par) {
  return par.beta * par.alpha * par.omega /
         (par.mu * (par.p + par.mu) * (par.q + par.mu1));
}

DeterministicSummary equilibria(const ModelParams& par) {
  DeterministicSummary out;
  out.r0 = reproduction_number(par);
  out.e0 = SimState{par.omega / par.mu, 0.0, 0.0};
  if (out.r0 > 1.0) {
    const double v1 =
        (par.p + par.mu) * (par.q + par.mu1) / (par.alpha * par.beta);
    const double v2 = par.mu * (par.mu1 + par.q) * (out.r0 - 1.0) /
                      (par.alpha * par.beta);
    const double v3 = par.mu * (out.r0 - 1.0) / par.beta;
    out.e1 = SimState{v1, v2, v3};
  }
  return out;
}

double lemma_gap(double u) {
  if (!(u > 0.0) || !std::isfinite(u)) {
    throw std::domain_error("lemma_gap requires u > 0");
  }
  return 2.0 * (u + 1.0 - std::log(u)) - (4.0 - 2.0 * std::log(2.0)) - u;
}

}  // namespace whsde
