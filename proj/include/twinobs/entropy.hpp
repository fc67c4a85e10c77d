#pragma once

#include <span>
#include <string>
#include <vector>

#include "twinobs/operator_core.hpp"

namespace twinobs {

/// Nonnegative weights summing to one within 1e-10.
class ProbabilityVector {
 public:
  /// Throws DomainError on a negative (or non-finite) weight and
  /// InputError when the sum is off by more than `sum_tol`.
  explicit ProbabilityVector(std::vector<double> weights, double sum_tol = 1e-10);

  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  std::vector<double> weights_;
};

/// Collects non-fatal numerical notes (e.g. clamped negative eigenvalues).
using Warnings = std::vector<std::string>;

/// Natural-log Shannon entropy with 0 ln 0 = 0.
double shannon_entropy(const ProbabilityVector& p);

/// Same, on raw weights; nonpositive entries contribute zero. Used for
/// sub-normalized detectable distributions.
double shannon_entropy_of(std::span<const double> weights);

/// Shannon entropy of the spectrum. Eigenvalues at or below `rank_tol`
/// contribute zero; negative eigenvalues below -1e-12 are noted in `warnings`.
double von_neumann_entropy(const DensityOperator& rho, double rank_tol = 1e-10,
                           Warnings* warnings = nullptr);

/// Non-selective ideal measurement state sum_i P_i rho P_i. The projectors
/// must be mutually orthogonal (InputError) and their sum certain in rho
/// (PreconditionError carrying the probability deficit).
DensityOperator luders_state(const DensityOperator& rho, std::span<const Projector> projectors,
                             const Tolerances& tol = {});

/// Entropy increase S(sum_i P_i rho P_i) - S(rho) over the detectable
/// branches of `a`. Requires `a` to be discrete in relation to rho.
double coherence_entropy(const SpectralForm& a, const DensityOperator& rho,
                         const Tolerances& tol = {});

/// Shannon entropy of the detectable outcome distribution p_i = Tr(P_i rho).
double observable_entropy(const SpectralForm& a, const DensityOperator& rho,
                          const Tolerances& tol = {});

/// Every term of S(A,rho) = E_C(A,rho) + (S(rho) - sum_i p_i S(P_i rho P_i / p_i)),
/// each computed on its own path.
struct EntropyLedger {
  double observable_entropy = 0.0;      // S(A, rho) = H(p_i)
  double coherence_entropy = 0.0;       // E_C(A, rho)
  double state_entropy = 0.0;           // S(rho)
  double luders_entropy = 0.0;          // S(sum_i P_i rho P_i)
  double avg_component_entropy = 0.0;   // sum_i p_i S(P_i rho P_i / p_i)
  double residual = 0.0;                // S(rho) - avg_component_entropy
  std::vector<double> probabilities;    // detectable p_i

  /// |S(A,rho) - E_C - residual|.
  double balance_residual() const;
  /// Largest violation of avg <= S(rho) <= S(Lueders), zero when it holds.
  double sandwich_violation() const;
  /// Whether every ledger invariant holds at the documented slack.
  bool consistent(double balance_tol = 1e-8, double order_tol = 1e-10) const;
};

EntropyLedger entropy_balance(const SpectralForm& a, const DensityOperator& rho,
                              const Tolerances& tol = {});

/// I(rho12) = S(rho1) + S(rho2) - S(rho12).
double mutual_information(const DensityOperator& rho12, double rank_tol = 1e-10);

/// Tr(rho B) against sum_l Tr[(P_l rho P_l) B]: whether the average of B
/// is a mixture of separate contributions from the branches of A.
struct MixtureAverageResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double discrepancy = 0.0;
  bool equal = false;
  HermitianOperator witness;
};

MixtureAverageResult mixture_average_check(const SpectralForm& a, const DensityOperator& rho,
                                           const HermitianOperator& b, double tol = 1e-8);

}  // namespace twinobs
