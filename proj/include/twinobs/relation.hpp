#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twinobs/operator_core.hpp"

namespace twinobs {

struct DetectableBranch {
  std::size_t branch = 0;  // index into SpectralForm::branches()
  double eigenvalue = 0.0;
  Projector projector;
  double probability = 0.0;
};

/// Branches of an observable partitioned by their probability in a state.
/// Undetectable branches are kept so that reports show them.
struct DetectableSplit {
  std::vector<DetectableBranch> detectable;
  std::vector<DetectableBranch> undetectable;
  Projector certain_projector;  // sum of detectable projectors
  double total_probability = 0.0;

  std::vector<Projector> detectable_projectors() const;
  std::vector<double> probabilities() const;
};

DetectableSplit detectable_split(const SpectralForm& a, const DensityOperator& rho,
                                 double detect_tol = 1e-10);

/// Certainty of sum_i P_i in rho for a (possibly partial) list of branches.
/// Overlapping projectors raise InputError.
CertaintyReport validate_relative_discreteness(std::span<const SpectralBranch> branches,
                                               const DensityOperator& rho,
                                               const Tolerances& tol = {});
CertaintyReport validate_relative_discreteness(const SpectralForm& a, const DensityOperator& rho,
                                               const Tolerances& tol = {});

/// Detectable split of `a` after checking that the detectable branches carry
/// total probability one; throws PreconditionError with the deficit if not.
DetectableSplit require_discrete(const SpectralForm& a, const DensityOperator& rho,
                                 const Tolerances& tol);

enum class Regime { strong, weak, intermediary };

const char* to_string(Regime r);

struct WeakBranch {
  std::size_t branch = 0;
  double eigenvalue = 0.0;
  Projector projector;
  double probability = 0.0;
  double commutator = 0.0;  // ||[P_j, rho]||
};

struct StrongBranch {
  std::size_t branch = 0;
  double eigenvalue = 0.0;
  Projector projector;
  double probability = 0.0;
  double commutator = 0.0;  // ||[P_k, rho]||
  DensityOperator component;  // P_k rho / p_k
};

/// rho = p_w rho_w + (1 - p_w) rho_st, split by whether each detectable
/// eigenprojector commutes with rho.
struct WeakStrongDecomposition {
  std::vector<WeakBranch> weak_branches;
  std::vector<StrongBranch> strong_branches;
  std::vector<DetectableBranch> undetectable;
  double weak_probability = 0.0;
  std::optional<DensityOperator> weak_state;
  std::optional<DensityOperator> strong_state;
  Regime regime = Regime::strong;
  double comm_tol = 0.0;

  /// || rho - p_w rho_w - (1 - p_w) rho_st ||.
  double recomposition_residual(const DensityOperator& rho) const;
  /// The weak component observable sum_j a_j P_j, padded with a zero
  /// remainder on the complement of its branches.
  std::optional<SpectralForm> weak_observable() const;
};

/// `comm_tol` defaults to tol.commutation * ||rho||.
WeakStrongDecomposition weak_strong_decompose(const SpectralForm& a, const DensityOperator& rho,
                                              std::optional<double> comm_tol = std::nullopt,
                                              const Tolerances& tol = {});

/// The coherence entropy of A in rho against the weak probability times
/// the coherence entropy of the weak component observable in the weak
/// component state. The two sides are evaluated independently.
struct WeakCoherenceSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double weak_probability = 0.0;
  Regime regime = Regime::strong;
};

WeakCoherenceSides weak_coherence_sides(const SpectralForm& a, const DensityOperator& rho,
                                        const Tolerances& tol = {});

enum class RefinementVerdict { strictly_finer, equal, not_comparable };

const char* to_string(RefinementVerdict v);

/// For one detectable coarse branch, the fine branches inside it.
struct RefinementCell {
  std::size_t coarse_branch = 0;
  std::vector<std::size_t> fine_branches;             // all contained fine branches
  std::vector<std::size_t> detectable_fine_branches;  // those with positive probability
  double sum_residual = 0.0;  // || P_i - sum of contained fine projectors ||
};

struct RefinementRelation {
  RefinementVerdict verdict = RefinementVerdict::not_comparable;
  std::vector<RefinementCell> mapping;
  std::string reason;  // set when not comparable
};

/// Whether the detectable eigenprojectors of `fine` decompose those of
/// `coarse`. Undetectable fine branches may appear inside a coarse branch;
/// only detectable ones count towards strictness.
RefinementRelation refinement_relation(const SpectralForm& fine, const SpectralForm& coarse,
                                       const DensityOperator& rho, const Tolerances& tol = {});

struct RefinementLedger {
  RefinementRelation relation;
  double entropy_fine = 0.0;        // S(A', rho)
  double entropy_coarse = 0.0;      // S(A, rho)
  double coherence_fine = 0.0;      // E_C(A', rho)
  double coherence_coarse = 0.0;    // E_C(A, rho)
  double decrease_fine = 0.0;       // S(rho) - sum p_{i,i'} S(component)
  double decrease_coarse = 0.0;     // S(rho) - sum p_i S(component)
  /// max over detectable fine P_{i,i'} of ||[P_{i,i'}, sum_i P_i rho P_i]||;
  /// zero iff A' commutes with the coarse Lueders state.
  double fine_luders_commutator = 0.0;
  /// max ||P_{i,i'} rho P_{i,i''}|| over distinct fine branches in one cell.
  double cross_term_norm = 0.0;
  /// S(A') - S(A) - sum_m p_m H(p_{m,i'} / p_m).
  double grouping_residual = 0.0;
};

/// Throws PreconditionError when `fine` is not a refinement of `coarse`.
RefinementLedger refinement_entropy_report(const SpectralForm& fine, const SpectralForm& coarse,
                                           const DensityOperator& rho,
                                           const Tolerances& tol = {});

struct CompletenessReport {
  bool complete = false;
  /// Per detectable branch, second-largest eigenvalue of P_i rho P_i / p_i.
  std::vector<double> second_eigenvalues;
  double commutator = 0.0;  // ||[A, rho]||
  /// When A commutes with rho: whether every P_i Q has rank one.
  std::optional<bool> range_rank_criterion;

  bool cross_check_agrees() const {
    return !range_rank_criterion || *range_rank_criterion == complete;
  }
};

CompletenessReport completeness(const SpectralForm& a, const DensityOperator& rho,
                                const Tolerances& tol = {});

/// Every detectable component P_i rho P_i / p_i is pure.
bool is_complete(const SpectralForm& a, const DensityOperator& rho, const Tolerances& tol = {});

}  // namespace twinobs
