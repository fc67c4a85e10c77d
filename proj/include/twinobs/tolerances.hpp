#pragma once

#include <optional>

namespace twinobs {

/// Numerical thresholds shared by the analysis routines. Every exact
/// equality of the underlying theory becomes one of these comparisons.
struct Tolerances {
  /// Entrywise |M - M^dagger| bound accepted as Hermitian.
  double hermiticity = 1e-10;
  /// Eigenvalues at or below this are zero (range, rank and entropy).
  double rank = 1e-10;
  /// Branch probabilities at or below this are undetectable.
  double detect = 1e-10;
  /// Allowed deficit of a total probability from one; also the default
  /// residual bound for operator identities.
  double certainty = 1e-8;
  /// Commutator bound, relative to the spectral norm of the state.
  double commutation = 1e-8;
  /// ||P_coarse P_fine - P_fine|| bound for subspace inclusion.
  double inclusion = 1e-8;
  /// Second-largest eigenvalue bound for a normalized component to count
  /// as pure.
  double purity = 1e-8;
  /// Absolute eigenvalue clustering gap; unset means 1e-8 * ||H||.
  std::optional<double> cluster;
  /// Trace-one tolerance for validated density operators.
  double trace = 1e-9;
};

}  // namespace twinobs
