#pragma once

#include <array>
#include <optional>

#include "whsde/model.hpp"

namespace whsde {

// Symmetric 2x2 matrix of the quadratic form that controls the decay of the
// infected subsystem (I, B):
//   d1 = 2(alpha - p - mu) - sigma1^2
//   d2 = 2 beta omega / mu - 2(q + mu1) - sigma2^2
//   b  = alpha + beta omega / mu - p - mu - q - mu1   (off-diagonal)
struct StabilityMatrix {
  double d1;
  double d2;
  double b;
  bool operator==(const StabilityMatrix&) const = default;
};

struct ConditionVerdict {
  double lhs;
  double rhs;
  bool holds;  // strict inequality lhs < rhs
};

struct StabilityReport {
  ConditionVerdict condition_a;
  ConditionVerdict condition_b;
  StabilityMatrix matrix;
  std::array<double, 2> eigenvalues;  // ascending
  bool negative_definite;             // both eigenvalues < 0
  // |lambda_max| / 4 when negative definite, absent otherwise [1/day].
  std::optional<double> decay_rate_bound;
  double boundedness_limit;  // sqrt(3) * omega
  double chebyshev_k;        // sqrt(3) * omega / epsilon
  double permanence_h;       // omega / mu
  double epsilon;
  // The textbook conditions A and B do not square the off-diagonal, so they
  // can disagree with the eigenvalue test.  Flagged, never reconciled.
  bool printed_conditions_disagree;
};

// Condition A:  alpha + beta*omega/mu - (p+q+mu+mu1)  <  (sigma1^2+sigma2^2)/2
ConditionVerdict condition_a(const ModelParams& par, const NoiseParams& noise);

// Condition B:  alpha + beta*omega/mu - (p+mu+q+mu1)  <  d1*d2
ConditionVerdict condition_b(const ModelParams& par, const NoiseParams& noise);

StabilityMatrix stability_matrix(const ModelParams& par,
                                 const NoiseParams& noise);

// Eigenvalues of [[d1, b], [b, d2]], sorted ascending.  The discriminant is
// computed as (d1-d2)^2/4 + b^2, non-negative for symmetric input.
std::array<double, 2> eigen2(const StabilityMatrix& m);

// Assembles every closed-form criterion.  epsilon must lie in (0, 1).
StabilityReport stability_report(const ModelParams& par,
                                 const NoiseParams& noise, double epsilon);

}  // namespace whsde
