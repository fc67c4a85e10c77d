#include "twinobs/twins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace twinobs {

namespace {

BipartiteDims require_dims(const DensityOperator& rho12, const char* what) {
  if (!rho12.bipartite_dims()) {
    throw ConfigurationError(std::string(what) + ": state carries no bipartite dimensions");
  }
  return *rho12.bipartite_dims();
}

void require_side_dim(const SpectralForm& a, BipartiteDims dims, Subsystem side,
                      const char* what) {
  if (a.dim() != dims.of(side)) {
    std::ostringstream os;
    os << what << ": observable dimension " << a.dim() << " does not match subsystem "
       << (side == Subsystem::first ? 1 : 2) << " dimension " << dims.of(side);
    throw DimensionError(os.str());
  }
}

/// Tr(A B) in O(n^2).
double trace_of_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.transpose().cwiseProduct(b).sum().real();
}

std::vector<double> default_labels(std::size_t n) {
  std::vector<double> labels(n);
  std::iota(labels.begin(), labels.end(), 1.0);
  return labels;
}

}  // namespace

// ---------------------------------------------------------------------------
// Schmidt decomposition

StateVector SchmidtForm::reconstruct() const {
  StateVector phi = StateVector::Zero(dims.total());
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    const auto idx = static_cast<Index>(k);
    phi += coefficients[k] * tensor_product(left_basis.col(idx), right_basis.col(idx));
  }
  return phi;
}

SchmidtForm schmidt_decompose(const StateVector& phi, BipartiteDims dims, double tol) {
  if (phi.size() != dims.total()) {
    throw DimensionError("schmidt_decompose: vector length does not match bipartite dims");
  }
  if (!phi.allFinite()) throw InputError("schmidt_decompose: non-finite entries");
  if (std::abs(phi.norm() - 1.0) > 1e-8) {
    throw InputError("schmidt_decompose: state vector is not normalized");
  }
  ComplexMatrix coeffs(dims.first, dims.second);
  for (Index a = 0; a < dims.first; ++a)
    for (Index b = 0; b < dims.second; ++b) coeffs(a, b) = phi(a * dims.second + b);

  Eigen::BDCSVD<ComplexMatrix> svd(coeffs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Index r = 0;
  while (r < s.size() && s(r) > tol) ++r;

  SchmidtForm form;
  form.dims = dims;
  form.coefficients.assign(s.data(), s.data() + r);
  form.left_basis = svd.matrixU().leftCols(r);
  // coeffs = U S V^dagger, so the right Schmidt vectors are the conjugated columns of V.
  form.right_basis = svd.matrixV().leftCols(r).conjugate();
  return form;
}

// ---------------------------------------------------------------------------
// PTO verification

double PtoReport::max_algebraic_residual() const {
  double m = 0.0;
  for (const auto& t : bijection) m = std::max(m, t.algebraic_residual.spectral);
  return m;
}

double PtoReport::max_measurement_residual() const {
  double m = 0.0;
  for (const auto& t : bijection) m = std::max(m, t.measurement_residual.spectral);
  return m;
}

bool PtoReport::compatibility_follows() const {
  return !is_pto || (derived_compatibility[0] <= tolerance && derived_compatibility[1] <= tolerance);
}

PtoReport verify_pto(const SpectralForm& a1, const SpectralForm& a2, const DensityOperator& rho12,
                     double tol, const Tolerances& tols) {
  const BipartiteDims dims = require_dims(rho12, "verify_pto");
  require_side_dim(a1, dims, Subsystem::first, "verify_pto");
  require_side_dim(a2, dims, Subsystem::second, "verify_pto");

  PtoReport report;
  report.tolerance = tol;
  const SpectralForm e1 = embed(a1, dims, Subsystem::first);
  const SpectralForm e2 = embed(a2, dims, Subsystem::second);
  const DetectableSplit s1 = detectable_split(e1, rho12, tols.detect);
  const DetectableSplit s2 = detectable_split(e2, rho12, tols.detect);
  report.total_probability_1 = s1.total_probability;
  report.total_probability_2 = s2.total_probability;

  bool ok = true;
  if (s1.total_probability < 1.0 - tol) {
    report.diagnostics.push_back("A1 is not discrete in relation to the state");
    ok = false;
  }
  if (s2.total_probability < 1.0 - tol) {
    report.diagnostics.push_back("A2 is not discrete in relation to the state");
    ok = false;
  }
  if (s1.detectable.size() != s2.detectable.size()) {
    std::ostringstream os;
    os << "detectable branch counts differ: " << s1.detectable.size() << " vs "
       << s2.detectable.size();
    report.diagnostics.push_back(os.str());
    ok = false;
  }

  const ComplexMatrix& rho = rho12.matrix();
  std::vector<ComplexMatrix> left1, left2;
  for (const auto& b : s1.detectable) left1.push_back(b.projector.matrix() * rho);
  for (const auto& b : s2.detectable) left2.push_back(b.projector.matrix() * rho);

  const std::size_t n1 = left1.size();
  const std::size_t n2 = left2.size();
  Eigen::MatrixXd residual(n1, n2);
  struct Candidate {
    double value;
    std::size_t i, j;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      residual(i, j) = spectral_norm(left1[i] - left2[j]);
      candidates.push_back({residual(i, j), i, j});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) { return x.value < y.value; });

  std::vector<bool> used1(n1, false), used2(n2, false);
  for (const auto& c : candidates) {
    if (used1[c.i] || used2[c.j]) continue;
    used1[c.i] = used2[c.j] = true;
    const auto& b1 = s1.detectable[c.i];
    const auto& b2 = s2.detectable[c.j];
    TwinMatch match;
    match.branch1 = b1.branch;
    match.branch2 = b2.branch;
    match.eigenvalue1 = b1.eigenvalue;
    match.eigenvalue2 = b2.eigenvalue;
    match.probability = b1.probability;
    match.algebraic_residual = {c.value, (left1[c.i] - left2[c.j]).norm()};
    const ComplexMatrix& p1 = b1.projector.matrix();
    const ComplexMatrix& p2 = b2.projector.matrix();
    match.measurement_residual = residual_norm(left1[c.i] * p1 - left2[c.j] * p2);
    match.runner_up = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n2; ++j)
      if (j != c.j) match.runner_up = std::min(match.runner_up, residual(c.i, j));
    for (std::size_t i = 0; i < n1; ++i)
      if (i != c.i) match.runner_up = std::min(match.runner_up, residual(i, c.j));
    report.bijection.push_back(match);
  }

  for (const auto& m : report.bijection) {
    if (m.algebraic_residual.spectral > tol) {
      std::ostringstream os;
      os << "pair (" << m.eigenvalue1 << ", " << m.eigenvalue2 << ") violates P1 rho = P2 rho by "
         << m.algebraic_residual.spectral;
      report.diagnostics.push_back(os.str());
      ok = false;
    } else if (m.runner_up <= tol) {
      std::ostringstream os;
      os << "pairing of eigenvalue " << m.eigenvalue1 << " is ambiguous (runner-up residual "
         << m.runner_up << ")";
      report.diagnostics.push_back(os.str());
      ok = false;
    }
  }
  report.is_pto = ok;

  const ComplexMatrix rho1 = partial_trace(rho, dims, Subsystem::first);
  const ComplexMatrix rho2 = partial_trace(rho, dims, Subsystem::second);
  const ComplexMatrix op1 = a1.operator_matrix();
  const ComplexMatrix op2 = a2.operator_matrix();
  report.derived_compatibility = {commutator_norm(op1, rho1), commutator_norm(op2, rho2)};
  report.algebraic_twin_residual = spectral_norm(embed(op1, dims, Subsystem::first) * rho -
                                                 embed(op2, dims, Subsystem::second) * rho);
  report.is_algebraic_twin = report.algebraic_twin_residual <= tol;
  return report;
}

// ---------------------------------------------------------------------------
// Constructions

TwinPair construct_pto_pure(const StateVector& phi, BipartiteDims dims,
                            std::optional<std::vector<double>> labels) {
  const SchmidtForm schmidt = schmidt_decompose(phi, dims);
  const std::size_t r = schmidt.coefficients.size();
  std::vector<double> values = labels ? *labels : default_labels(r);
  if (values.size() != r) {
    std::ostringstream os;
    os << "construct_pto_pure: " << values.size() << " labels for Schmidt rank " << r;
    throw InputError(os.str());
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InputError("construct_pto_pure: labels must be distinct");
  }
  return {spectral_form_from_basis(values, schmidt.left_basis),
          spectral_form_from_basis(values, schmidt.right_basis)};
}

SchmidtMixture construct_schmidt_mixture(const std::vector<ProbabilityVector>& spectra,
                                           const ProbabilityVector& weights, BipartiteDims dims) {
  if (spectra.empty()) throw InputError("construct_schmidt_mixture: no spectra");
  if (weights.size() != spectra.size()) {
    throw InputError("construct_schmidt_mixture: one weight per spectrum required");
  }
  const std::size_t n = spectra.front().size();
  if (static_cast<Index>(n) > std::min(dims.first, dims.second)) {
    throw DimensionError("construct_schmidt_mixture: spectrum longer than a local dimension");
  }
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    if (spectra[k].size() != n) {
      throw InputError("construct_schmidt_mixture: spectra must share one length");
    }
    for (double r : spectra[k].weights()) {
      if (!(r > 0.0)) throw InputError("construct_schmidt_mixture: spectra need positive entries");
    }
  }
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    std::vector<double> a = spectra[k].weights();
    std::sort(a.begin(), a.end());
    for (std::size_t l = k + 1; l < spectra.size(); ++l) {
      std::vector<double> b = spectra[l].weights();
      std::sort(b.begin(), b.end());
      double gap = 0.0;
      for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
      if (gap <= 1e-12) {
        throw InputError("construct_schmidt_mixture: spectra must be pairwise distinct");
      }
    }
  }

  std::vector<StateVector> components;
  ComplexMatrix rho = ComplexMatrix::Zero(dims.total(), dims.total());
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    StateVector phi = StateVector::Zero(dims.total());
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = static_cast<Index>(i);
      phi(idx * dims.second + idx) = std::sqrt(spectra[k][i]);
    }
    rho += weights[k] * phi * phi.adjoint();
    components.push_back(std::move(phi));
  }

  const auto rows = static_cast<Index>(n);
  const std::vector<double> labels = default_labels(n);
  TwinPair twins{
      spectral_form_from_basis(labels,
                               ComplexMatrix::Identity(dims.first, dims.first).leftCols(rows)),
      spectral_form_from_basis(labels,
                               ComplexMatrix::Identity(dims.second, dims.second).leftCols(rows))};
  return {DensityOperator(rho, dims), std::move(twins), std::move(components)};
}

// ---------------------------------------------------------------------------
// Correlations incompatibility

CorrelationsIncompatibility correlations_incompatibility(const SpectralForm& a,
                                                         const DensityOperator& rho12,
                                                         Subsystem side, double tol,
                                                         const Tolerances& tols) {
  const BipartiteDims dims = require_dims(rho12, "correlations_incompatibility");
  require_side_dim(a, dims, side, "correlations_incompatibility");
  const DensityOperator reduced = partial_trace(rho12, side);
  CorrelationsIncompatibility out;
  out.discrete = detectable_split(a, reduced, tols.detect).total_probability >= 1.0 - tols.certainty;
  const ComplexMatrix op = a.operator_matrix();
  out.subsystem_commutator = commutator_norm(op, reduced.matrix());
  out.composite_commutator = commutator_norm(embed(op, dims, side), rho12.matrix());
  out.holds = out.discrete && out.subsystem_commutator <= tol && out.composite_commutator > tol;
  return out;
}

// ---------------------------------------------------------------------------
// Discord decomposition

const char* to_string(DiscordStatus s) {
  switch (s) {
    case DiscordStatus::available: return "available";
    case DiscordStatus::not_pto: return "not_pto";
    case DiscordStatus::incomplete: return "incomplete";
  }
  return "unknown";
}

double DiscordLedger::luders_split_residual(std::size_t s) const {
  return std::abs(mutual_information - sides[s].coherence_entropy - sides[s].luders_info);
}

double DiscordLedger::twin_split_residual(std::size_t s) const {
  return std::abs(mutual_information - sides[s].observable_entropy - sides[s].coherence_entropy -
                  sides[s].residual_info);
}

double DiscordLedger::side_symmetry_residual() const {
  const auto& x = sides[0];
  const auto& y = sides[1];
  return std::max({std::abs(x.observable_entropy - y.observable_entropy),
                   std::abs(x.coherence_entropy - y.coherence_entropy),
                   std::abs(x.residual_info - y.residual_info),
                   std::abs(x.luders_info - y.luders_info)});
}

DiscordLedger discord_decomposition(const DensityOperator& rho12, const SpectralForm& a1,
                                    const SpectralForm& a2, double tol, const Tolerances& tols) {
  const BipartiteDims dims = require_dims(rho12, "discord_decomposition");
  require_side_dim(a1, dims, Subsystem::first, "discord_decomposition");
  require_side_dim(a2, dims, Subsystem::second, "discord_decomposition");

  DiscordLedger ledger;
  ledger.mutual_information = mutual_information(rho12, tols.rank);
  ledger.pto = verify_pto(a1, a2, rho12, tol, tols);

  const std::array<const SpectralForm*, 2> locals{&a1, &a2};
  const std::array<Subsystem, 2> which{Subsystem::first, Subsystem::second};
  for (std::size_t s = 0; s < 2; ++s) {
    const SpectralForm embedded = embed(*locals[s], dims, which[s]);
    const DetectableSplit split = require_discrete(embedded, rho12, tols);
    SideTerms& terms = ledger.sides[s];
    terms.observable_entropy = shannon_entropy_of(split.probabilities());
    terms.coherence_entropy = coherence_entropy(embedded, rho12, tols);
    const DensityOperator measured = luders_state(rho12, split.detectable_projectors(), tols);
    terms.luders_info = mutual_information(measured, tols.rank);
    for (const auto& b : split.detectable) {
      const ComplexMatrix& p = b.projector.matrix();
      const DensityOperator component =
          DensityOperator::from_trusted(p * rho12.matrix() * p / b.probability, dims);
      terms.residual_info += b.probability * mutual_information(component, tols.rank);
    }
    const DensityOperator reduced = partial_trace(rho12, which[s]);
    terms.subsystem_commutator = commutator_norm(locals[s]->operator_matrix(), reduced.matrix());
    terms.complete = is_complete(*locals[s], reduced, tols);
  }

  auto note = [&](const std::string& what, double value) {
    std::ostringstream os;
    os << what << " (" << value << ")";
    ledger.violations.push_back(os.str());
  };
  for (std::size_t s = 0; s < 2; ++s) {
    if (ledger.sides[s].subsystem_commutator <= tol && ledger.luders_split_residual(s) > tol) {
      note("mutual information split through side " + std::to_string(s + 1) + " fails",
           ledger.luders_split_residual(s));
    }
  }

  if (!ledger.pto.is_pto) {
    ledger.status = DiscordStatus::not_pto;
    return ledger;
  }
  for (std::size_t s = 0; s < 2; ++s) {
    if (ledger.twin_split_residual(s) > tol) {
      note("twin decomposition through side " + std::to_string(s + 1) + " fails",
           ledger.twin_split_residual(s));
    }
  }
  if (ledger.side_symmetry_residual() > tol) {
    note("side terms disagree", ledger.side_symmetry_residual());
  }
  if (!ledger.sides[0].complete || !ledger.sides[1].complete) {
    ledger.status = DiscordStatus::incomplete;
    return ledger;
  }
  ledger.status = DiscordStatus::available;
  ledger.i_qcl = ledger.sides[0].observable_entropy;
  ledger.discord = ledger.mutual_information - *ledger.i_qcl;
  if (ledger.residual_info() > tol) note("residual information of complete twins", ledger.residual_info());
  if (std::abs(*ledger.discord - ledger.coherence_entropy()) > tol) {
    note("discord differs from coherence entropy", *ledger.discord - ledger.coherence_entropy());
  }
  return ledger;
}

// ---------------------------------------------------------------------------
// Biorthogonal mixtures

MixtureInfoSides biorthogonal_mixture_info(const std::vector<BiorthogonalComponent>& components,
                                           const std::vector<Projector>& first_sectors,
                                           const std::vector<Projector>& second_sectors,
                                           double tol, double rank_tol) {
  if (components.empty()) throw InputError("biorthogonal_mixture_info: no components");
  if (first_sectors.size() != components.size() || second_sectors.size() != components.size()) {
    throw InputError("biorthogonal_mixture_info: one sector pair per component required");
  }
  const BipartiteDims dims = require_dims(components.front().state, "biorthogonal_mixture_info");
  for (const auto& c : components) {
    if (!c.state.bipartite_dims() || !(*c.state.bipartite_dims() == dims)) {
      throw DimensionError("biorthogonal_mixture_info: components differ in bipartite dims");
    }
  }
  auto check_orthogonal = [](const std::vector<Projector>& sectors, Index d, const char* side) {
    for (std::size_t i = 0; i < sectors.size(); ++i) {
      if (sectors[i].dim() != d) {
        throw DimensionError(std::string("biorthogonal_mixture_info: ") + side +
                             " sector dimension mismatch");
      }
      for (std::size_t j = i + 1; j < sectors.size(); ++j) {
        if ((sectors[i].matrix() * sectors[j].matrix()).norm() > 1e-8) {
          throw InputError(std::string("biorthogonal_mixture_info: ") + side +
                           " sectors are not orthogonal");
        }
      }
    }
  };
  check_orthogonal(first_sectors, dims.first, "first");
  check_orthogonal(second_sectors, dims.second, "second");

  std::vector<double> w;
  for (const auto& c : components) w.push_back(c.weight);
  const ProbabilityVector weights(w);

  MixtureInfoSides out;
  ComplexMatrix mixture = ComplexMatrix::Zero(dims.total(), dims.total());
  double average_info = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    const ComplexMatrix& r = components[k].state.matrix();
    const ComplexMatrix confined = embed(first_sectors[k].matrix(), dims, Subsystem::first) * r *
                                   embed(second_sectors[k].matrix(), dims, Subsystem::second);
    out.worst_confinement = std::max(out.worst_confinement, spectral_norm(r - confined));
    mixture += weights[k] * r;
    if (weights[k] > 0.0) {
      average_info += weights[k] * mutual_information(components[k].state, rank_tol);
    }
  }
  if (out.worst_confinement > tol) {
    throw PreconditionError("biorthogonal_mixture_info: a component leaves its sectors",
                            out.worst_confinement);
  }
  out.lhs = mutual_information(DensityOperator::from_trusted(mixture, dims), rank_tol);
  out.rhs = shannon_entropy(weights) + average_info;
  return out;
}

// ---------------------------------------------------------------------------
// Joint measurement

JointDistribution joint_measurement_distribution(const SpectralForm& a1, const SpectralForm& a2,
                                                 const DensityOperator& rho12,
                                                 const Tolerances& tols) {
  const BipartiteDims dims = require_dims(rho12, "joint_measurement_distribution");
  require_side_dim(a1, dims, Subsystem::first, "joint_measurement_distribution");
  require_side_dim(a2, dims, Subsystem::second, "joint_measurement_distribution");
  const DetectableSplit s1 = require_discrete(a1, partial_trace(rho12, Subsystem::first), tols);
  const DetectableSplit s2 = require_discrete(a2, partial_trace(rho12, Subsystem::second), tols);

  JointDistribution out;
  const auto n1 = static_cast<Index>(s1.detectable.size());
  const auto n2 = static_cast<Index>(s2.detectable.size());
  out.joint = Eigen::MatrixXd::Zero(n1, n2);
  for (Index i = 0; i < n1; ++i) {
    for (Index j = 0; j < n2; ++j) {
      const ComplexMatrix event = tensor_product(s1.detectable[i].projector.matrix(),
                                                 s2.detectable[j].projector.matrix());
      out.joint(i, j) = std::max(0.0, trace_of_product(rho12.matrix(), event));
    }
  }
  for (const auto& b : s1.detectable) out.branches_first.push_back(b.branch);
  for (const auto& b : s2.detectable) out.branches_second.push_back(b.branch);
  for (Index i = 0; i < n1; ++i) out.marginal_first.push_back(out.joint.row(i).sum());
  for (Index j = 0; j < n2; ++j) out.marginal_second.push_back(out.joint.col(j).sum());
  out.entropy_first = shannon_entropy_of(out.marginal_first);
  out.entropy_second = shannon_entropy_of(out.marginal_second);
  out.entropy_joint =
      shannon_entropy_of(std::span<const double>(out.joint.data(), out.joint.size()));
  out.classical_mutual_information = out.entropy_first + out.entropy_second - out.entropy_joint;
  return out;
}

}  // namespace twinobs
