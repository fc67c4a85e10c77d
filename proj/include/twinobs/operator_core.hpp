#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "twinobs/errors.hpp"
#include "twinobs/tolerances.hpp"

namespace twinobs {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using Index = Eigen::Index;

enum class Subsystem { first, second };

inline Subsystem opposite(Subsystem s) {
  return s == Subsystem::first ? Subsystem::second : Subsystem::first;
}

/// Local dimensions of a two-party system. The composite index of
/// |i1>|i2> is i1 * second + i2 (subsystem 1 is the slow factor).
struct BipartiteDims {
  Index first = 1;
  Index second = 1;

  Index total() const { return first * second; }
  Index of(Subsystem s) const { return s == Subsystem::first ? first : second; }
  bool operator==(const BipartiteDims&) const = default;
};

/// Spectral and Frobenius norms of the same residual operator.
struct ResidualNorm {
  double spectral = 0.0;
  double frobenius = 0.0;
};

class HermitianOperator {
 public:
  /// Validates squareness, finiteness and Hermiticity within `tol`, then
  /// stores the symmetrized matrix (M + M^dagger) / 2.
  explicit HermitianOperator(const ComplexMatrix& m, double tol = 1e-10);

  static HermitianOperator zero(Index dim);

  const ComplexMatrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

/// Unit-trace positive semidefinite operator. The eigen-decomposition is
/// computed once at construction and shared by every entropy and range
/// query made on the state.
class DensityOperator {
 public:
  explicit DensityOperator(const ComplexMatrix& m,
                           std::optional<BipartiteDims> dims = std::nullopt,
                           const Tolerances& tol = {});

  /// |psi><psi| for a unit vector (norm checked to `norm_tol`).
  static DensityOperator pure(const StateVector& psi,
                              std::optional<BipartiteDims> dims = std::nullopt,
                              double norm_tol = 1e-8);

  /// Skips validation. For states derived inside the library whose
  /// invariants hold up to roundoff; the matrix is symmetrized.
  static DensityOperator from_trusted(const ComplexMatrix& m,
                                      std::optional<BipartiteDims> dims = std::nullopt);

  const ComplexMatrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  const std::optional<BipartiteDims>& bipartite_dims() const { return dims_; }

  /// Ascending eigenvalues, unclamped.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// Orthonormal eigenvectors, columns matching eigenvalues().
  const ComplexMatrix& eigenvectors() const { return eigenvectors_; }
  /// Largest eigenvalue, which is the spectral norm for a PSD operator.
  double spectral_norm() const;

  DensityOperator with_dims(BipartiteDims dims) const;

 private:
  DensityOperator() = default;
  void diagonalize();

  ComplexMatrix m_;
  std::optional<BipartiteDims> dims_;
  Eigen::VectorXd eigenvalues_;
  ComplexMatrix eigenvectors_;
};

class Projector {
 public:
  /// Validates ||P^2 - P|| <= tol and Hermiticity.
  explicit Projector(const ComplexMatrix& m, double tol = 1e-8);

  /// V V^dagger for a matrix with orthonormal columns.
  static Projector from_orthonormal_columns(const ComplexMatrix& v);
  /// |v><v| / <v|v>.
  static Projector onto(const StateVector& v);
  /// Skips validation; for matrices known to be projectors of `rank`.
  static Projector from_trusted(const ComplexMatrix& m, Index rank);
  static Projector identity(Index dim);
  static Projector zero(Index dim);

  const ComplexMatrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  Index rank() const { return rank_; }
  Projector complement() const;

 private:
  Projector() = default;
  ComplexMatrix m_;
  Index rank_ = 0;
};

struct SpectralBranch {
  double eigenvalue = 0.0;
  Projector projector;
};

/// sum_i a_i P_i + R, with the P_i mutually orthogonal, the a_i distinct and
/// R (optional) supported on the orthocomplement of sum_i P_i.
class SpectralForm {
 public:
  SpectralForm(std::vector<SpectralBranch> branches,
               std::optional<HermitianOperator> remainder = std::nullopt,
               double tol = 1e-8);

  const std::vector<SpectralBranch>& branches() const { return branches_; }
  const std::optional<HermitianOperator>& remainder() const { return remainder_; }
  Index dim() const { return dim_; }

  /// The operator the form represents.
  ComplexMatrix operator_matrix() const;
  /// sum_i P_i.
  ComplexMatrix branch_support() const;

 private:
  std::vector<SpectralBranch> branches_;
  std::optional<HermitianOperator> remainder_;
  Index dim_ = 0;
};

/// Certainty of an event P in a state rho, by three equivalent criteria:
/// Tr(P rho) = 1, P rho = rho, and P Q = Q for the range projector Q.
struct CertaintyReport {
  double probability = 0.0;
  ResidualNorm algebraic_residual;  // P rho - rho
  ResidualNorm range_residual;      // P Q - Q
  double tolerance = 0.0;
  bool certain = false;             // probability >= 1 - tolerance

  /// The operator criteria are quadratic in the probability deficit, so
  /// they are compared against sqrt(tolerance).
  bool algebraic_certain() const;
  bool range_certain() const;
  /// All three criteria give the same verdict.
  bool consistent() const;
};

bool hermitian_check(const ComplexMatrix& m, double tol);

double spectral_norm(const ComplexMatrix& m);
ResidualNorm residual_norm(const ComplexMatrix& m);

/// Kronecker product with row-major composite index i = i1 * rows(B) + i2.
ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);

/// A (x) 1 or 1 (x) A on the composite space.
ComplexMatrix embed(const ComplexMatrix& local, BipartiteDims dims, Subsystem side);

ComplexMatrix partial_trace(const ComplexMatrix& m, BipartiteDims dims, Subsystem keep);
DensityOperator partial_trace(const DensityOperator& rho12, Subsystem keep);

/// Eigenvalue-clustered spectral decomposition. Consecutive sorted
/// eigenvalues closer than the gap join one branch whose eigenvalue is the
/// cluster mean. `cluster_tol` defaults to 1e-8 * ||H||.
SpectralForm spectral_decompose(const HermitianOperator& h,
                                std::optional<double> cluster_tol = std::nullopt);

/// Sum of eigenprojectors of rho for eigenvalues above `rank_tol`.
Projector range_projector(const DensityOperator& rho, double rank_tol = 1e-10);

/// Spectral norm of AB - BA.
double commutator_norm(const ComplexMatrix& a, const ComplexMatrix& b);
double commutator_norm(const HermitianOperator& a, const HermitianOperator& b);

CertaintyReport is_certain_event(const Projector& p, const DensityOperator& rho,
                                 double tol = 1e-8, double rank_tol = 1e-10);

/// Spectral form sum_k labels[k] |v_k><v_k| over orthonormal columns v_k,
/// with equal labels merged into one branch and `complement_value` on the
/// orthocomplement of the columns (merged too if it equals a label).
SpectralForm spectral_form_from_basis(std::span<const double> labels,
                                      const ComplexMatrix& orthonormal_columns,
                                      double complement_value = 0.0);

/// P (x) 1 or 1 (x) P.
Projector embed(const Projector& p, BipartiteDims dims, Subsystem side);

/// Branches of `a` lifted to the composite space as P (x) 1 or 1 (x) P.
SpectralForm embed(const SpectralForm& a, BipartiteDims dims, Subsystem side);

}  // namespace twinobs
