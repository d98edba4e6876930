#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "whsde/model.hpp"

using namespace whsde;

namespace {

// Table-derived baseline parameter set used throughout the tests.
const ModelParams kTable2{10.0, 0.005, 0.1, 0.6, 0.24, 0.795, 0.28};
// Persistent regime: beta and mu1 changed.
const ModelParams kPersistent{10.0, 0.05, 0.1, 0.1, 0.24, 0.795, 0.28};

ModelParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  return ModelParams{10.0 * u(rng), 0.01 * u(rng), 0.1 * u(rng),
                     0.5 * u(rng),  0.3 * u(rng),  0.5 * u(rng),
                     0.3 * u(rng)};
}

}  // namespace

TEST_CASE("drift at the infection-free state is zero") {
  const Vec3 f = drift({100.0, 0.0, 0.0}, kTable2);
  CHECK(f[0] == doctest::Approx(0.0));
  CHECK(f[1] == 0.0);
  CHECK(f[2] == 0.0);
}

TEST_CASE("drift from the origin is pure birth") {
  const Vec3 f = drift({0.0, 0.0, 0.0}, kTable2);
  CHECK(f[0] == 10.0);
  CHECK(f[1] == 0.0);
  CHECK(f[2] == 0.0);
}

TEST_CASE("drift hand values") {
  const Vec3 f = drift({100.0, 10.0, 10.0}, kTable2);
  CHECK(f[0] == doctest::Approx(-5.0));
  CHECK(f[1] == doctest::Approx(-3.95));
  CHECK(f[2] == doctest::Approx(-6.4));
}

TEST_CASE("diffusion coefficients and channels") {
  CHECK(diffusion({100.0, 50.0, 20.0}, {0.0, 0.0}) == Vec3{0.0, 0.0, 0.0});
  const Vec3 g = diffusion({100.0, 50.0, 20.0}, {0.1, 0.1});
  CHECK(g[0] == doctest::Approx(-10.0));
  CHECK(g[1] == doctest::Approx(-5.0));
  CHECK(g[2] == doctest::Approx(-2.0));
  CHECK(diffusion({0.0, 0.0, 0.0}, {3.0, 5.0}) == Vec3{0.0, 0.0, 0.0});
  // S and I ride the first Wiener channel, B the second.
  CHECK(kDiffusionChannel[0] == kDiffusionChannel[1]);
  CHECK(kDiffusionChannel[0] != kDiffusionChannel[2]);
}

TEST_CASE("controlled drift reduces to drift at zero control") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 300.0);
  for (int rep = 0; rep < 200; ++rep) {
    const ModelParams par = random_params(rng);
    const SimState x{u(rng), u(rng), u(rng)};
    const Vec3 a = drift(x, par);
    const Vec3 b = controlled_drift(x, {0.0, 0.0, 0.0}, par);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
    CHECK(a[2] == b[2]);
  }
}

TEST_CASE("controlled drift hand values") {
  const Vec3 f = controlled_drift({100.0, 10.0, 10.0}, {0.5, 0.0, 0.0},
                                  kTable2);
  CHECK(f[1] == doctest::Approx(-8.95));
  // u2 = alpha cancels virion production entirely.
  const Vec3 g = controlled_drift({0.0, 10.0, 0.0}, {0.0, 0.0, 0.24},
                                  kTable2);
  CHECK(g[2] == doctest::Approx(0.0));
}

TEST_CASE("controlled drift rejects inadmissible controls") {
  CHECK_THROWS_AS(controlled_drift({1, 1, 1}, {-0.1, 0, 0}, kTable2),
                  std::invalid_argument);
  CHECK_THROWS_AS(controlled_drift({1, 1, 1}, {0, 0, std::nan("")}, kTable2),
                  std::invalid_argument);
}

TEST_CASE("reproduction number") {
  CHECK(reproduction_number(kTable2) == doctest::Approx(0.15).epsilon(0.04));
  CHECK(reproduction_number(kTable2) ==
        doctest::Approx(0.1523616).epsilon(1e-6));
  CHECK(reproduction_number(kPersistent) ==
        doctest::Approx(3.5283740).epsilon(1e-6));
  ModelParams no_transmission = kTable2;
  no_transmission.beta = 0.0;  // outside the validated range, still total
  CHECK(reproduction_number(no_transmission) == 0.0);
}

TEST_CASE("reproduction number monotonicity") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    const ModelParams par = random_params(rng);
    const double r = reproduction_number(par);
    auto bumped = [&](auto set) {
      ModelParams q = par;
      set(q);
      return reproduction_number(q);
    };
    CHECK(bumped([](ModelParams& q) { q.beta *= 1.01; }) > r);
    CHECK(bumped([](ModelParams& q) { q.alpha *= 1.01; }) > r);
    CHECK(bumped([](ModelParams& q) { q.omega *= 1.01; }) > r);
    CHECK(bumped([](ModelParams& q) { q.mu *= 1.01; }) < r);
    CHECK(bumped([](ModelParams& q) { q.mu1 *= 1.01; }) < r);
    CHECK(bumped([](ModelParams& q) { q.p *= 1.01; }) < r);
    CHECK(bumped([](ModelParams& q) { q.q *= 1.01; }) < r);
  }
}

TEST_CASE("equilibria") {
  const DeterministicSummary t2 = equilibria(kTable2);
  CHECK(t2.e0.s == doctest::Approx(100.0));
  CHECK(t2.e0.i == 0.0);
  CHECK(t2.e0.b == 0.0);
  CHECK_FALSE(t2.e1.has_value());

  const DeterministicSummary ex2 = equilibria(kPersistent);
  REQUIRE(ex2.e1.has_value());
  CHECK(ex2.e1->s == doctest::Approx(28.3417).epsilon(1e-4));
  CHECK(ex2.e1->i == doctest::Approx(8.00652).epsilon(1e-4));
  CHECK(ex2.e1->b == doctest::Approx(5.05675).epsilon(1e-4));

  // Tuning beta to the threshold removes the infected equilibrium.
  ModelParams critical = kTable2;
  critical.beta = critical.mu * (critical.p + critical.mu) *
                  (critical.q + critical.mu1) /
                  (critical.alpha * critical.omega);
  const DeterministicSummary crit = equilibria(critical);
  CHECK(crit.r0 == doctest::Approx(1.0));
  CHECK_FALSE(crit.e1.has_value());
  // Barely above threshold: components are tiny but reported.
  critical.beta *= 1.0 + 1e-9;
  const DeterministicSummary above = equilibria(critical);
  REQUIRE(above.e1.has_value());
  CHECK(above.e1->i < 1e-5);
  CHECK(above.e1->b < 1e-5);
}

TEST_CASE("drift vanishes at both equilibria over random parameters") {
  std::mt19937_64 rng(55);
  int persistent_sets = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const ModelParams par = random_params(rng);
    const DeterministicSummary summary = equilibria(par);
    const Vec3 f0 = drift(summary.e0, par);
    CHECK(std::abs(f0[0]) <= 1e-10 * (1.0 + par.omega));
    CHECK(f0[1] == 0.0);
    CHECK(f0[2] == 0.0);
    if (summary.e1) {
      ++persistent_sets;
      const Vec3 f1 = drift(*summary.e1, par);
      const double scale = par.omega + summary.e1->s + summary.e1->b;
      for (double component : f1) {
        CHECK(std::abs(component) <= 1e-10 * scale);
      }
    }
  }
  CHECK(persistent_sets > 20);  // the draw covers both regimes
}

TEST_CASE("susceptible plus infected transfer consistency") {
  // d(S+I)/dt = omega - mu(S+I) - pI: the transmission terms cancel.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  for (int rep = 0; rep < 300; ++rep) {
    const ModelParams par = random_params(rng);
    const SimState x{u(rng), u(rng), u(rng)};
    const Vec3 f = drift(x, par);
    const double expected = par.omega - par.mu * (x.s + x.i) - par.p * x.i;
    CHECK(f[0] + f[1] ==
          doctest::Approx(expected).epsilon(1e-12).scale(1.0 + expected));
  }
}

TEST_CASE("lemma gap values and positivity") {
  CHECK(lemma_gap(2.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(lemma_gap(1.0) == doctest::Approx(2.0 * std::log(2.0) - 1.0));
  CHECK(lemma_gap(4.0) == doctest::Approx(2.0 - 2.0 * std::log(2.0)));

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> exponent(-6.0, 6.0);
  for (int rep = 0; rep < 10000; ++rep) {
    const double u = std::pow(10.0, exponent(rng));
    CHECK(lemma_gap(u) >= 0.0);
  }

  // Fine grid around the minimum at u = 2.
  double min_gap = 1.0;
  for (int k = 0; k <= 4000; ++k) {
    min_gap = std::min(min_gap, lemma_gap(1.99 + 5e-6 * k));
  }
  CHECK(min_gap < 1e-8);
  CHECK(min_gap >= 0.0);

  CHECK_THROWS_AS(lemma_gap(0.0), std::domain_error);
  CHECK_THROWS_AS(lemma_gap(-1.0), std::domain_error);
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(kTable2.validate());
  ModelParams bad = kTable2;
  bad.beta = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = kTable2;
  bad.omega = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_NOTHROW(NoiseParams{0.0, 0.0}.validate());
  CHECK_THROWS_AS((NoiseParams{-0.1, 0.0}.validate()), std::invalid_argument);
}
