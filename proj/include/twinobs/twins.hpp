#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "twinobs/entropy.hpp"
#include "twinobs/operator_core.hpp"
#include "twinobs/relation.hpp"

namespace twinobs {

/// phi = sum_k c_k |u_k> (x) |v_k> with c_k > 0 descending.
struct SchmidtForm {
  std::vector<double> coefficients;
  ComplexMatrix left_basis;   // d1 x r, orthonormal columns u_k
  ComplexMatrix right_basis;  // d2 x r, orthonormal columns v_k
  BipartiteDims dims;

  StateVector reconstruct() const;
};

/// SVD of the d1 x d2 coefficient matrix phi[i1 * d2 + i2]. Coefficients at
/// or below `tol` are dropped. InputError if |phi| differs from one by more
/// than 1e-8.
SchmidtForm schmidt_decompose(const StateVector& phi, BipartiteDims dims, double tol = 1e-10);

struct TwinMatch {
  std::size_t branch1 = 0;  // index into A1's branches
  std::size_t branch2 = 0;  // index into A2's branches
  double eigenvalue1 = 0.0;
  double eigenvalue2 = 0.0;
  double probability = 0.0;
  ResidualNorm algebraic_residual;    // (P1 (x) 1) rho - (1 (x) P2) rho
  ResidualNorm measurement_residual;  // P1 rho P1 - P2 rho P2 (both embedded)
  double runner_up = 0.0;             // second-smallest algebraic residual in row/column
};

/// Physical-twin verdict for a pair of opposite-subsystem observables.
struct PtoReport {
  std::vector<TwinMatch> bijection;
  double total_probability_1 = 0.0;
  double total_probability_2 = 0.0;
  /// ||[A1, rho1]|| and ||[A2, rho2]||, never imposed, only measured.
  std::array<double, 2> derived_compatibility{0.0, 0.0};
  /// ||(A1 (x) 1) rho - (1 (x) A2) rho||.
  double algebraic_twin_residual = 0.0;
  double tolerance = 0.0;
  bool is_pto = false;
  bool is_algebraic_twin = false;
  std::vector<std::string> diagnostics;

  double max_algebraic_residual() const;
  double max_measurement_residual() const;
  /// A PTO verdict implies compatibility with the reduced states.
  bool compatibility_follows() const;
};

/// Matches detectable branches greedily by smallest algebraic residual and
/// accepts the pairing only if it is a bijection with every residual within
/// `tol` and every runner-up above it. Failures are reported, not thrown.
PtoReport verify_pto(const SpectralForm& a1, const SpectralForm& a2, const DensityOperator& rho12,
                     double tol = 1e-8, const Tolerances& tols = {});

struct TwinPair {
  SpectralForm first;
  SpectralForm second;
};

/// Twins over the Schmidt vectors of a pure state: A_s = sum_k a_k |k><k|_s
/// with eigenvalue 0 on the orthocomplement. Labels default to a_k = k + 1.
TwinPair construct_pto_pure(const StateVector& phi, BipartiteDims dims,
                            std::optional<std::vector<double>> labels = std::nullopt);

/// Mixture of pure states sharing the computational Schmidt bases together
/// with the diagonal twins that are complete for it.
struct SchmidtMixture {
  DensityOperator rho12;
  TwinPair twins;
  std::vector<StateVector> components;
};

/// rho12 = sum_k w_k |Phi_k><Phi_k| with Phi_k = sum_i sqrt(r^k_i) |i>|i>.
/// Each spectrum must be strictly positive, of common length n <= min(d1, d2),
/// and distinct from the others.
SchmidtMixture construct_schmidt_mixture(const std::vector<ProbabilityVector>& spectra,
                                           const ProbabilityVector& weights, BipartiteDims dims);

struct CorrelationsIncompatibility {
  bool holds = false;
  bool discrete = false;
  double subsystem_commutator = 0.0;  // ||[A, rho_s]||
  double composite_commutator = 0.0;  // ||[A (x) 1, rho12]|| or ||[1 (x) A, rho12]||
};

/// A commutes with its reduced state but not with the composite state.
CorrelationsIncompatibility correlations_incompatibility(const SpectralForm& a,
                                                         const DensityOperator& rho12,
                                                         Subsystem side, double tol = 1e-8,
                                                         const Tolerances& tols = {});

/// Terms of the mutual-information decomposition evaluated through one
/// subsystem's observable.
struct SideTerms {
  double observable_entropy = 0.0;  // S(A_s, rho12)
  double coherence_entropy = 0.0;   // E_C(A_s, rho12)
  double residual_info = 0.0;       // sum_i p_i I(rho12^i)
  double luders_info = 0.0;         // I(sum_i P_s^i rho12 P_s^i)
  double subsystem_commutator = 0.0;
  bool complete = false;            // A_s complete in relation to rho_s
};

enum class DiscordStatus { available, not_pto, incomplete };

const char* to_string(DiscordStatus s);

struct DiscordLedger {
  double mutual_information = 0.0;
  std::array<SideTerms, 2> sides;
  std::optional<double> i_qcl;
  std::optional<double> discord;
  DiscordStatus status = DiscordStatus::not_pto;
  PtoReport pto;
  std::vector<std::string> violations;

  double observable_entropy() const { return sides[0].observable_entropy; }
  double coherence_entropy() const { return sides[0].coherence_entropy; }
  double residual_info() const { return sides[0].residual_info; }
  double luders_info() const { return sides[0].luders_info; }

  /// |I - E_C - I(Lueders)| for side s.
  double luders_split_residual(std::size_t s) const;
  /// |I - S(A_s) - E_C - sum p_i I(rho^i)| for side s.
  double twin_split_residual(std::size_t s) const;
  /// Largest entrywise gap between the two sides' terms.
  double side_symmetry_residual() const;
};

/// Mutual information split into observable entropy, coherence entropy
/// and the residual term, from both sides. When the pair is not a PTO only
/// the correlations-incompatibility terms are meaningful; the discord is
/// withheld unless both observables are complete for their reduced states.
DiscordLedger discord_decomposition(const DensityOperator& rho12, const SpectralForm& a1,
                                    const SpectralForm& a2, double tol = 1e-8,
                                    const Tolerances& tols = {});

struct BiorthogonalComponent {
  double weight = 0.0;
  DensityOperator state;
};

struct MixtureInfoSides {
  double lhs = 0.0;  // I(sum_k p_k rho^k)
  double rhs = 0.0;  // H(p_k) + sum_k p_k I(rho^k)
  double worst_confinement = 0.0;
};

/// Mixing property of mutual information for components confined to
/// mutually orthogonal sectors P1^k on subsystem 1 and Q2^k on subsystem 2.
MixtureInfoSides biorthogonal_mixture_info(const std::vector<BiorthogonalComponent>& components,
                                           const std::vector<Projector>& first_sectors,
                                           const std::vector<Projector>& second_sectors,
                                           double tol = 1e-8, double rank_tol = 1e-10);

/// Outcome statistics of measuring A1 (x) 1 and 1 (x) A2 together.
struct JointDistribution {
  Eigen::MatrixXd joint;  // p_{i i'} over detectable branches
  std::vector<double> marginal_first;
  std::vector<double> marginal_second;
  std::vector<std::size_t> branches_first;
  std::vector<std::size_t> branches_second;
  double entropy_first = 0.0;
  double entropy_second = 0.0;
  double entropy_joint = 0.0;
  double classical_mutual_information = 0.0;
};

JointDistribution joint_measurement_distribution(const SpectralForm& a1, const SpectralForm& a2,
                                                 const DensityOperator& rho12,
                                                 const Tolerances& tols = {});

}  // namespace twinobs
