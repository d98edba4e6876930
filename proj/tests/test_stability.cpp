#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "whsde/stability.hpp"

using namespace whsde;

namespace {

const ModelParams kTable2{10.0, 0.005, 0.1, 0.6, 0.24, 0.795, 0.28};
const ModelParams kPersistent{10.0, 0.05, 0.1, 0.1, 0.24, 0.795, 0.28};
const NoiseParams kSmallNoise{0.1, 0.1};

}  // namespace

TEST_CASE("condition A") {
  const ConditionVerdict a = condition_a(kTable2, kSmallNoise);
  CHECK(a.lhs == doctest::Approx(-1.035));
  CHECK(a.rhs == doctest::Approx(0.01));
  CHECK(a.holds);

  const ConditionVerdict a2 = condition_a(kPersistent, kSmallNoise);
  CHECK(a2.lhs == doctest::Approx(3.965));
  CHECK_FALSE(a2.holds);

  // Boundary: strict inequality fails at equality.  Tune alpha so that
  // alpha + beta*omega/mu = p + q + mu + mu1 with zero noise.
  ModelParams boundary = kTable2;
  boundary.alpha = boundary.p + boundary.q + boundary.mu + boundary.mu1 -
                   boundary.beta * boundary.omega / boundary.mu;
  const ConditionVerdict ab = condition_a(boundary, {0.0, 0.0});
  CHECK(ab.lhs == doctest::Approx(0.0).scale(1.0));
  CHECK_FALSE(ab.holds);
}

TEST_CASE("stability matrix entries") {
  const StabilityMatrix m = stability_matrix(kTable2, kSmallNoise);
  CHECK(m.d1 == doctest::Approx(-1.32));
  CHECK(m.d2 == doctest::Approx(-0.77));
  CHECK(m.b == doctest::Approx(-1.035));
  // The off-diagonal coincides with condition A's left-hand side.
  CHECK(m.b == condition_a(kTable2, kSmallNoise).lhs);

  // Constructed zero diagonal: alpha = p + mu and beta*omega/mu = q + mu1.
  ModelParams z = kTable2;
  z.alpha = z.p + z.mu;
  z.beta = (z.q + z.mu1) * z.mu / z.omega;
  const StabilityMatrix mz = stability_matrix(z, {0.0, 0.0});
  CHECK(mz.d1 == doctest::Approx(0.0).scale(1.0));
  CHECK(mz.d2 == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("condition B") {
  const ConditionVerdict b = condition_b(kTable2, kSmallNoise);
  CHECK(b.lhs == doctest::Approx(-1.035));
  CHECK(b.rhs == doctest::Approx((-1.32) * (-0.77)));
  CHECK(b.holds);

  const ConditionVerdict b2 = condition_b(kPersistent, kSmallNoise);
  CHECK_FALSE(b2.holds);

  // Equality boundary is a rejection.
  const StabilityMatrix m = stability_matrix(kTable2, kSmallNoise);
  CHECK(m.d1 * m.d2 > condition_b(kTable2, kSmallNoise).lhs);
}

TEST_CASE("eigen2 closed form") {
  const StabilityMatrix m{-1.32, -0.77, -1.035};
  const auto eig = eigen2(m);
  CHECK(eig[0] == doctest::Approx(-2.1159108).epsilon(1e-6));
  CHECK(eig[1] == doctest::Approx(0.0259108).epsilon(1e-4));

  const auto diag = eigen2({-3.0, -1.0, 0.0});
  CHECK(diag[0] == -3.0);
  CHECK(diag[1] == -1.0);

  const auto repeated = eigen2({-2.5, -2.5, 0.0});
  CHECK(repeated[0] == -2.5);
  CHECK(repeated[1] == -2.5);
}

TEST_CASE("eigen2 trace and determinant identities") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int rep = 0; rep < 10000; ++rep) {
    const StabilityMatrix m{u(rng), u(rng), u(rng)};
    const auto eig = eigen2(m);
    CHECK(eig[0] <= eig[1]);
    const double scale = 1.0 + m.d1 * m.d1 + m.d2 * m.d2 + m.b * m.b;
    CHECK(std::abs(eig[0] + eig[1] - (m.d1 + m.d2)) <= 1e-12 * scale);
    CHECK(std::abs(eig[0] * eig[1] - (m.d1 * m.d2 - m.b * m.b)) <=
          1e-12 * scale);
    // Characteristic polynomial residual at each eigenvalue.
    for (const double lambda : eig) {
      const double residual =
          (m.d1 - lambda) * (m.d2 - lambda) - m.b * m.b;
      CHECK(std::abs(residual) <= 1e-11 * scale);
    }
  }
}

TEST_CASE("stability report") {
  const StabilityReport rep = stability_report(kTable2, kSmallNoise, 0.1);
  CHECK(rep.condition_a.holds);
  CHECK(rep.condition_b.holds);
  CHECK(rep.boundedness_limit == doctest::Approx(std::sqrt(3.0) * 10.0));
  CHECK(rep.chebyshev_k == doctest::Approx(std::sqrt(3.0) * 100.0));
  CHECK(rep.permanence_h == doctest::Approx(100.0));
  // The printed conditions pass while the matrix is indefinite
  // (b^2 = 1.0712 exceeds d1*d2 = 1.0164): flagged, not reconciled.
  CHECK(rep.eigenvalues[1] > 0.0);
  CHECK_FALSE(rep.negative_definite);
  CHECK_FALSE(rep.decay_rate_bound.has_value());
  CHECK(rep.printed_conditions_disagree);

  const StabilityReport rep2 =
      stability_report(kPersistent, kSmallNoise, 0.1);
  CHECK_FALSE(rep2.condition_a.holds);
  CHECK_FALSE(rep2.condition_b.holds);
  CHECK_FALSE(rep2.negative_definite);
  CHECK_FALSE(rep2.decay_rate_bound.has_value());
  CHECK_FALSE(rep2.printed_conditions_disagree);

  // Huge noise satisfies condition A regardless of the rates.
  const StabilityReport loud = stability_report(kTable2, {10.0, 10.0}, 0.1);
  CHECK(loud.condition_a.rhs == doctest::Approx(100.0));
  CHECK(loud.condition_a.holds);

  CHECK_THROWS_AS(stability_report(kTable2, kSmallNoise, 0.0),
                  std::domain_error);
  CHECK_THROWS_AS(stability_report(kTable2, kSmallNoise, 1.0),
                  std::domain_error);
}

TEST_CASE("report agreement over random parameters") {
  // Wherever the printed conditions hold with negative diagonals AND the
  // off-diagonal is small enough (b^2 < d1*d2), the matrix is negative
  // definite; all remaining disagreement cases carry the flag.
  std::mt19937_64 rng(4321);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  int definite = 0, flagged = 0;
  for (int rep = 0; rep < 5000; ++rep) {
    const ModelParams par{10.0 * u(rng), 0.01 * u(rng), 0.1 * u(rng),
                          0.5 * u(rng),  0.3 * u(rng),  0.5 * u(rng),
                          0.3 * u(rng)};
    const NoiseParams noise{0.2 * u(rng), 0.2 * u(rng)};
    const StabilityReport rep_full = stability_report(par, noise, 0.05);
    const StabilityMatrix& m = rep_full.matrix;
    CHECK(rep_full.negative_definite == (rep_full.eigenvalues[1] < 0.0));
    if (rep_full.negative_definite) {
      ++definite;
      CHECK(m.d1 < 0.0);
      CHECK(m.d2 < 0.0);
      CHECK(m.b * m.b < m.d1 * m.d2);
      CHECK(*rep_full.decay_rate_bound > 0.0);
      CHECK(*rep_full.decay_rate_bound ==
            doctest::Approx(std::abs(rep_full.eigenvalues[1]) / 4.0));
    } else {
      CHECK_FALSE(rep_full.decay_rate_bound.has_value());
    }
    const bool printed = rep_full.condition_a.holds &&
                         rep_full.condition_b.holds && m.d1 < 0.0 &&
                         m.d2 < 0.0;
    CHECK(rep_full.printed_conditions_disagree ==
          (printed != rep_full.negative_definite));
    if (rep_full.printed_conditions_disagree) ++flagged;
    if (printed && m.b * m.b < m.d1 * m.d2) {
      CHECK(rep_full.negative_definite);
    }
  }
  CHECK(definite > 0);
  CHECK(flagged > 0);  // the draw exercises the disagreement branch
}

TEST_CASE("stability report is deterministic") {
  const StabilityReport a = stability_report(kTable2, kSmallNoise, 0.05);
  const StabilityReport b = stability_report(kTable2, kSmallNoise, 0.05);
  CHECK(a.matrix == b.matrix);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.condition_a.lhs == b.condition_a.lhs);
  CHECK(a.condition_b.rhs == b.condition_b.rhs);
  CHECK(a.chebyshev_k == b.chebyshev_k);
}
