#include "twinobs/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace twinobs {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + ": matrix has non-finite entries");
}

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": dimension mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows()
       << "x" << b.cols();
    throw DimensionError(os.str());
  }
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return (m + m.adjoint()) * 0.5;
}

}  // namespace

// ---------------------------------------------------------------------------
// HermitianOperator

HermitianOperator::HermitianOperator(const ComplexMatrix& m, double tol) {
  require_square(m, "HermitianOperator");
  require_finite(m, "HermitianOperator");
  if (!hermitian_check(m, tol)) {
    throw InputError("HermitianOperator: matrix is not Hermitian within tolerance");
  }
  m_ = hermitian_part(m);
}

HermitianOperator HermitianOperator::zero(Index dim) {
  return HermitianOperator(ComplexMatrix::Zero(dim, dim));
}

// ---------------------------------------------------------------------------
// DensityOperator

DensityOperator::DensityOperator(const ComplexMatrix& m, std::optional<BipartiteDims> dims,
                                 const Tolerances& tol) {
  require_square(m, "DensityOperator");
  require_finite(m, "DensityOperator");
  if (!hermitian_check(m, tol.hermiticity)) {
    throw InputError("DensityOperator: matrix is not Hermitian within tolerance");
  }
  if (dims && dims->total() != m.rows()) {
    std::ostringstream os;
    os << "DensityOperator: bipartite dims " << dims->first << "x" << dims->second
       << " do not match dimension " << m.rows();
    throw DimensionError(os.str());
  }
  m_ = hermitian_part(m);
  dims_ = dims;
  const double trace = m_.trace().real();
  if (std::abs(trace - 1.0) > tol.trace) {
    std::ostringstream os;
    os.precision(17);
    os << "DensityOperator: trace " << trace << " differs from 1";
    throw InputError(os.str());
  }
  diagonalize();
  if (eigenvalues_(0) < -tol.rank) {
    std::ostringstream os;
    os << "DensityOperator: negative eigenvalue " << eigenvalues_(0);
    throw InputError(os.str());
  }
}

DensityOperator DensityOperator::pure(const StateVector& psi, std::optional<BipartiteDims> dims,
                                      double norm_tol) {
  if (psi.size() == 0) throw DimensionError("DensityOperator::pure: empty vector");
  if (!psi.allFinite()) throw InputError("DensityOperator::pure: non-finite entries");
  if (std::abs(psi.norm() - 1.0) > norm_tol) {
    throw InputError("DensityOperator::pure: state vector is not normalized");
  }
  if (dims && dims->total() != psi.size()) {
    throw DimensionError("DensityOperator::pure: bipartite dims do not match vector length");
  }
  const StateVector unit = psi / psi.norm();
  return from_trusted(unit * unit.adjoint(), dims);
}

DensityOperator DensityOperator::from_trusted(const ComplexMatrix& m,
                                              std::optional<BipartiteDims> dims) {
  require_square(m, "DensityOperator");
  if (dims && dims->total() != m.rows()) {
    throw DimensionError("DensityOperator: bipartite dims do not match dimension");
  }
  DensityOperator rho;
  rho.m_ = hermitian_part(m);
  rho.dims_ = dims;
  rho.diagonalize();
  return rho;
}

void DensityOperator::diagonalize() {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("DensityOperator: eigensolver failed", -1.0);
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

double DensityOperator::spectral_norm() const {
  return std::max(std::abs(eigenvalues_(0)), std::abs(eigenvalues_(eigenvalues_.size() - 1)));
}

DensityOperator DensityOperator::with_dims(BipartiteDims dims) const {
  if (dims.total() != dim()) {
    throw DimensionError("DensityOperator::with_dims: dims do not match dimension");
  }
  DensityOperator copy = *this;
  copy.dims_ = dims;
  return copy;
}

// ---------------------------------------------------------------------------
// Projector

Projector::Projector(const ComplexMatrix& m, double tol) {
  require_square(m, "Projector");
  require_finite(m, "Projector");
  if (!hermitian_check(m, tol)) throw InputError("Projector: matrix is not Hermitian");
  m_ = hermitian_part(m);
  const double idem = spectral_norm(m_ * m_ - m_);
  if (idem > tol) {
    std::ostringstream os;
    os << "Projector: ||P^2 - P|| = " << idem << " exceeds tolerance";
    throw InputError(os.str());
  }
  rank_ = static_cast<Index>(std::llround(m_.trace().real()));
}

Projector Projector::from_orthonormal_columns(const ComplexMatrix& v) {
  Projector p;
  p.m_ = hermitian_part(v * v.adjoint());
  p.rank_ = v.cols();
  return p;
}

Projector Projector::onto(const StateVector& v) {
  const double n = v.norm();
  if (n == 0.0) throw InputError("Projector::onto: zero vector");
  return from_orthonormal_columns(v / n);
}

Projector Projector::from_trusted(const ComplexMatrix& m, Index rank) {
  Projector p;
  p.m_ = hermitian_part(m);
  p.rank_ = rank;
  return p;
}

Projector Projector::identity(Index dim) {
  Projector p;
  p.m_ = ComplexMatrix::Identity(dim, dim);
  p.rank_ = dim;
  return p;
}

Projector Projector::zero(Index dim) {
  Projector p;
  p.m_ = ComplexMatrix::Zero(dim, dim);
  p.rank_ = 0;
  return p;
}

Projector Projector::complement() const {
  Projector p;
  p.m_ = ComplexMatrix::Identity(dim(), dim()) - m_;
  p.rank_ = dim() - rank_;
  return p;
}

// ---------------------------------------------------------------------------
// SpectralForm

SpectralForm::SpectralForm(std::vector<SpectralBranch> branches,
                           std::optional<HermitianOperator> remainder, double tol)
    : branches_(std::move(branches)), remainder_(std::move(remainder)) {
  if (branches_.empty() && !remainder_) {
    throw InputError("SpectralForm: needs at least one branch or a remainder");
  }
  dim_ = branches_.empty() ? remainder_->dim() : branches_.front().projector.dim();
  for (const auto& b : branches_) {
    if (b.projector.dim() != dim_) throw DimensionError("SpectralForm: branch dimension mismatch");
    if (!std::isfinite(b.eigenvalue)) throw InputError("SpectralForm: non-finite eigenvalue");
  }
  if (remainder_ && remainder_->dim() != dim_) {
    throw DimensionError("SpectralForm: remainder dimension mismatch");
  }
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    for (std::size_t j = i + 1; j < branches_.size(); ++j) {
      if (branches_[i].eigenvalue == branches_[j].eigenvalue) {
        throw InputError("SpectralForm: eigenvalues must be distinct");
      }
      const double overlap =
          (branches_[i].projector.matrix() * branches_[j].projector.matrix()).norm();
      if (overlap > tol) {
        std::ostringstream os;
        os << "SpectralForm: branches " << i << " and " << j << " overlap (" << overlap << ")";
        throw InputError(os.str());
      }
    }
  }
  const ComplexMatrix support = branch_support();
  if (remainder_) {
    const double leak = (support * remainder_->matrix()).norm();
    const double scale = std::max(1.0, remainder_->matrix().norm());
    if (leak > tol * scale) {
      throw InputError("SpectralForm: remainder is not supported on the branch orthocomplement");
    }
  } else {
    const double gap = (support - ComplexMatrix::Identity(dim_, dim_)).norm();
    if (gap > tol) {
      throw InputError("SpectralForm: branches do not resolve the identity and no remainder given");
    }
  }
}

ComplexMatrix SpectralForm::operator_matrix() const {
  ComplexMatrix out = remainder_ ? remainder_->matrix() : ComplexMatrix::Zero(dim_, dim_);
  for (const auto& b : branches_) out += b.eigenvalue * b.projector.matrix();
  return out;
}

ComplexMatrix SpectralForm::branch_support() const {
  ComplexMatrix out = ComplexMatrix::Zero(dim_, dim_);
  for (const auto& b : branches_) out += b.projector.matrix();
  return out;
}

// ---------------------------------------------------------------------------
// CertaintyReport

bool CertaintyReport::algebraic_certain() const {
  return algebraic_residual.spectral <= std::sqrt(tolerance);
}

bool CertaintyReport::range_certain() const {
  return range_residual.spectral <= std::sqrt(tolerance);
}

bool CertaintyReport::consistent() const {
  return certain == algebraic_certain() && certain == range_certain();
}

// ---------------------------------------------------------------------------
// Free functions

bool hermitian_check(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "hermitian_check: non-square " << m.rows() << "x" << m.cols() << " matrix";
    throw DimensionError(os.str());
  }
  if (m.size() == 0) return true;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double spectral_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

ResidualNorm residual_norm(const ComplexMatrix& m) {
  return {spectral_norm(m), m.norm()};
}

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!a.allFinite() || !b.allFinite()) throw InputError("tensor_product: non-finite entries");
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix embed(const ComplexMatrix& local, BipartiteDims dims, Subsystem side) {
  require_square(local, "embed");
  if (local.rows() != dims.of(side)) {
    throw DimensionError("embed: operator dimension does not match subsystem");
  }
  if (side == Subsystem::first) {
    return tensor_product(local, ComplexMatrix::Identity(dims.second, dims.second));
  }
  return tensor_product(ComplexMatrix::Identity(dims.first, dims.first), local);
}

ComplexMatrix partial_trace(const ComplexMatrix& m, BipartiteDims dims, Subsystem keep) {
  require_square(m, "partial_trace");
  if (m.rows() != dims.total()) {
    throw DimensionError("partial_trace: matrix dimension does not match bipartite dims");
  }
  const Index d1 = dims.first;
  const Index d2 = dims.second;
  if (keep == Subsystem::first) {
    ComplexMatrix out = ComplexMatrix::Zero(d1, d1);
    for (Index a = 0; a < d1; ++a)
      for (Index b = 0; b < d1; ++b)
        for (Index k = 0; k < d2; ++k) out(a, b) += m(a * d2 + k, b * d2 + k);
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(d2, d2);
  for (Index k = 0; k < d1; ++k) out += m.block(k * d2, k * d2, d2, d2);
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho12, Subsystem keep) {
  if (!rho12.bipartite_dims()) {
    throw ConfigurationError("partial_trace: state carries no bipartite dimensions");
  }
  return DensityOperator::from_trusted(
      partial_trace(rho12.matrix(), *rho12.bipartite_dims(), keep));
}

SpectralForm spectral_decompose(const HermitianOperator& h, std::optional<double> cluster_tol) {
  const Index n = h.dim();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral_decompose: eigensolver did not converge", -1.0);
  }
  const Eigen::VectorXd& values = solver.eigenvalues();
  const ComplexMatrix& vectors = solver.eigenvectors();
  const double norm = std::max(std::abs(values(0)), std::abs(values(n - 1)));
  const double gap = cluster_tol.value_or(1e-8 * norm);

  std::vector<SpectralBranch> branches;
  Index start = 0;
  for (Index i = 1; i <= n; ++i) {
    if (i < n && values(i) - values(i - 1) <= gap) continue;
    const Index count = i - start;
    const double mean = values.segment(start, count).mean();
    branches.push_back(
        {mean, Projector::from_orthonormal_columns(vectors.middleCols(start, count))});
    start = i;
  }

  ComplexMatrix rebuilt = ComplexMatrix::Zero(n, n);
  for (const auto& b : branches) rebuilt += b.eigenvalue * b.projector.matrix();
  const double residual = spectral_norm(rebuilt - h.matrix());
  const double allowed = 1e-10 * std::max(1.0, norm) + static_cast<double>(n) * gap;
  if (residual > allowed) {
    std::ostringstream os;
    os << "spectral_decompose: reconstruction residual " << residual << " exceeds " << allowed;
    throw NumericalError(os.str(), residual);
  }
  return SpectralForm(std::move(branches));
}

Projector range_projector(const DensityOperator& rho, double rank_tol) {
  const Eigen::VectorXd& values = rho.eigenvalues();
  Index first = 0;
  while (first < values.size() && values(first) <= rank_tol) ++first;
  return Projector::from_orthonormal_columns(
      rho.eigenvectors().rightCols(values.size() - first));
}

double commutator_norm(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_square(a, "commutator_norm");
  require_same_dim(a, b, "commutator_norm");
  const ComplexMatrix c = a * b - b * a;
  // For Hermitian arguments i[A,B] is Hermitian; its eigenvalues give the norm.
  const ComplexMatrix ic = Complex(0.0, 1.0) * c;
  if (hermitian_check(ic, 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff()))) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(ic),
                                                        Eigen::EigenvaluesOnly);
    if (solver.info() == Eigen::Success) {
      return solver.eigenvalues().cwiseAbs().maxCoeff();
    }
  }
  return spectral_norm(c);
}

double commutator_norm(const HermitianOperator& a, const HermitianOperator& b) {
  return commutator_norm(a.matrix(), b.matrix());
}

CertaintyReport is_certain_event(const Projector& p, const DensityOperator& rho, double tol,
                                 double rank_tol) {
  require_same_dim(p.matrix(), rho.matrix(), "is_certain_event");
  const Projector q = range_projector(rho, rank_tol);
  CertaintyReport report;
  report.tolerance = tol;
  report.probability = (p.matrix() * rho.matrix()).trace().real();
  report.algebraic_residual = residual_norm(p.matrix() * rho.matrix() - rho.matrix());
  report.range_residual = residual_norm(p.matrix() * q.matrix() - q.matrix());
  report.certain = report.probability >= 1.0 - tol;
  return report;
}

SpectralForm spectral_form_from_basis(std::span<const double> labels,
                                      const ComplexMatrix& orthonormal_columns,
                                      double complement_value) {
  const Index dim = orthonormal_columns.rows();
  const Index k = orthonormal_columns.cols();
  if (static_cast<Index>(labels.size()) != k) {
    throw DimensionError("spectral_form_from_basis: one label per column required");
  }
  if (k > dim) throw DimensionError("spectral_form_from_basis: more columns than dimension");
  const ComplexMatrix gram = orthonormal_columns.adjoint() * orthonormal_columns;
  if ((gram - ComplexMatrix::Identity(k, k)).norm() > 1e-9) {
    throw InputError("spectral_form_from_basis: columns are not orthonormal");
  }

  std::vector<double> distinct;
  for (double a : labels) {
    if (std::find(distinct.begin(), distinct.end(), a) == distinct.end()) distinct.push_back(a);
  }
  std::vector<ComplexMatrix> sums(distinct.size(), ComplexMatrix::Zero(dim, dim));
  for (Index c = 0; c < k; ++c) {
    const auto pos = std::find(distinct.begin(), distinct.end(), labels[c]) - distinct.begin();
    sums[pos] += orthonormal_columns.col(c) * orthonormal_columns.col(c).adjoint();
  }
  if (k < dim) {
    const ComplexMatrix rest =
        ComplexMatrix::Identity(dim, dim) - orthonormal_columns * orthonormal_columns.adjoint();
    const auto it = std::find(distinct.begin(), distinct.end(), complement_value);
    if (it == distinct.end()) {
      distinct.push_back(complement_value);
      sums.push_back(rest);
    } else {
      sums[it - distinct.begin()] += rest;
    }
  }
  std::vector<SpectralBranch> branches;
  branches.reserve(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    branches.push_back({distinct[i], Projector(sums[i], 1e-8)});
  }
  return SpectralForm(std::move(branches));
}

Projector embed(const Projector& p, BipartiteDims dims, Subsystem side) {
  return Projector::from_trusted(embed(p.matrix(), dims, side),
                                 p.rank() * dims.of(opposite(side)));
}

SpectralForm embed(const SpectralForm& a, BipartiteDims dims, Subsystem side) {
  std::vector<SpectralBranch> branches;
  branches.reserve(a.branches().size());
  for (const auto& b : a.branches()) {
    branches.push_back({b.eigenvalue, embed(b.projector, dims, side)});
  }
  std::optional<HermitianOperator> remainder;
  if (a.remainder()) remainder = HermitianOperator(embed(a.remainder()->matrix(), dims, side));
  return SpectralForm(std::move(branches), std::move(remainder));
}

}  // namespace twinobs
