#include "twinobs/relation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twinobs/entropy.hpp"

namespace twinobs {

namespace {

void require_same_dim(const SpectralForm& a, const DensityOperator& rho, const char* what) {
  if (a.dim() != rho.dim()) {
    std::ostringstream os;
    os << what << ": observable dimension " << a.dim() << " does not match state dimension "
       << rho.dim();
    throw DimensionError(os.str());
  }
}

double second_largest_eigenvalue(const DensityOperator& rho) {
  const Eigen::VectorXd& values = rho.eigenvalues();
  return values.size() < 2 ? 0.0 : values(values.size() - 2);
}

}  // namespace

std::vector<Projector> DetectableSplit::detectable_projectors() const {
  std::vector<Projector> out;
  out.reserve(detectable.size());
  for (const auto& b : detectable) out.push_back(b.projector);
  return out;
}

std::vector<double> DetectableSplit::probabilities() const {
  std::vector<double> out;
  out.reserve(detectable.size());
  for (const auto& b : detectable) out.push_back(b.probability);
  return out;
}

DetectableSplit detectable_split(const SpectralForm& a, const DensityOperator& rho,
                                 double detect_tol) {
  require_same_dim(a, rho, "detectable_split");
  DetectableSplit split{{}, {}, Projector::zero(rho.dim()), 0.0};
  ComplexMatrix support = ComplexMatrix::Zero(rho.dim(), rho.dim());
  Index rank = 0;
  for (std::size_t i = 0; i < a.branches().size(); ++i) {
    const auto& b = a.branches()[i];
    const double p = (b.projector.matrix() * rho.matrix()).trace().real();
    DetectableBranch entry{i, b.eigenvalue, b.projector, p};
    if (p > detect_tol) {
      support += b.projector.matrix();
      rank += b.projector.rank();
      split.total_probability += p;
      split.detectable.push_back(std::move(entry));
    } else {
      split.undetectable.push_back(std::move(entry));
    }
  }
  split.certain_projector = Projector::from_trusted(support, rank);
  return split;
}

CertaintyReport validate_relative_discreteness(std::span<const SpectralBranch> branches,
                                               const DensityOperator& rho,
                                               const Tolerances& tol) {
  ComplexMatrix support = ComplexMatrix::Zero(rho.dim(), rho.dim());
  Index rank = 0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (branches[i].projector.dim() != rho.dim()) {
      throw DimensionError("validate_relative_discreteness: projector dimension mismatch");
    }
    for (std::size_t j = i + 1; j < branches.size(); ++j) {
      const double overlap =
          (branches[i].projector.matrix() * branches[j].projector.matrix()).norm();
      if (overlap > tol.inclusion) {
        std::ostringstream os;
        os << "validate_relative_discreteness: branches " << i << " and " << j << " overlap";
        throw InputError(os.str());
      }
    }
    support += branches[i].projector.matrix();
    rank += branches[i].projector.rank();
  }
  return is_certain_event(Projector::from_trusted(support, rank), rho, tol.certainty, tol.rank);
}

CertaintyReport validate_relative_discreteness(const SpectralForm& a, const DensityOperator& rho,
                                               const Tolerances& tol) {
  require_same_dim(a, rho, "validate_relative_discreteness");
  return validate_relative_discreteness(std::span<const SpectralBranch>(a.branches()), rho, tol);
}

DetectableSplit require_discrete(const SpectralForm& a, const DensityOperator& rho,
                                 const Tolerances& tol) {
  DetectableSplit split = detectable_split(a, rho, tol.detect);
  if (split.total_probability < 1.0 - tol.certainty) {
    std::ostringstream os;
    os.precision(17);
    os << "observable is not discrete in relation to the state: detectable probability "
       << split.total_probability;
    throw PreconditionError(os.str(), 1.0 - split.total_probability);
  }
  return split;
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::strong: return "strong";
    case Regime::weak: return "weak";
    case Regime::intermediary: return "intermediary";
  }
  return "unknown";
}

double WeakStrongDecomposition::recomposition_residual(const DensityOperator& rho) const {
  ComplexMatrix sum = ComplexMatrix::Zero(rho.dim(), rho.dim());
  if (weak_state) sum += weak_probability * weak_state->matrix();
  if (strong_state) sum += (1.0 - weak_probability) * strong_state->matrix();
  return spectral_norm(rho.matrix() - sum);
}

std::optional<SpectralForm> WeakStrongDecomposition::weak_observable() const {
  if (weak_branches.empty()) return std::nullopt;
  std::vector<SpectralBranch> branches;
  branches.reserve(weak_branches.size());
  for (const auto& w : weak_branches) branches.push_back({w.eigenvalue, w.projector});
  const Index dim = weak_branches.front().projector.dim();
  return SpectralForm(std::move(branches), HermitianOperator::zero(dim));
}

WeakStrongDecomposition weak_strong_decompose(const SpectralForm& a, const DensityOperator& rho,
                                              std::optional<double> comm_tol,
                                              const Tolerances& tol) {
  const DetectableSplit split = require_discrete(a, rho, tol);
  WeakStrongDecomposition out;
  out.comm_tol = comm_tol.value_or(tol.commutation * rho.spectral_norm());
  out.undetectable = split.undetectable;

  const Index n = rho.dim();
  ComplexMatrix weak_support = ComplexMatrix::Zero(n, n);
  for (const auto& b : split.detectable) {
    const ComplexMatrix& p = b.projector.matrix();
    const double c = commutator_norm(p, rho.matrix());
    if (c <= out.comm_tol) {
      out.strong_branches.push_back(
          {b.branch, b.eigenvalue, b.projector, b.probability, c,
           DensityOperator::from_trusted(p * rho.matrix() * p / b.probability)});
    } else {
      out.weak_branches.push_back({b.branch, b.eigenvalue, b.projector, b.probability, c});
      out.weak_probability += b.probability;
      weak_support += p;
    }
  }

  if (!out.weak_branches.empty()) {
    out.weak_state = DensityOperator::from_trusted(
        weak_support * rho.matrix() * weak_support / out.weak_probability);
  }
  if (!out.strong_branches.empty()) {
    const double strong_probability = 1.0 - out.weak_probability;
    ComplexMatrix st = ComplexMatrix::Zero(n, n);
    for (const auto& k : out.strong_branches) {
      st += (k.probability / strong_probability) * k.component.matrix();
    }
    out.strong_state = DensityOperator::from_trusted(st);
  }

  if (out.weak_branches.empty()) {
    out.regime = Regime::strong;
  } else if (out.strong_branches.empty()) {
    out.regime = Regime::weak;
  } else {
    out.regime = Regime::intermediary;
  }
  return out;
}

WeakCoherenceSides weak_coherence_sides(const SpectralForm& a, const DensityOperator& rho,
                                        const Tolerances& tol) {
  WeakCoherenceSides sides;
  sides.lhs = coherence_entropy(a, rho, tol);
  const WeakStrongDecomposition dec = weak_strong_decompose(a, rho, std::nullopt, tol);
  sides.weak_probability = dec.weak_probability;
  sides.regime = dec.regime;
  if (dec.weak_state) {
    sides.rhs = dec.weak_probability * coherence_entropy(*dec.weak_observable(), *dec.weak_state, tol);
  }
  return sides;
}

const char* to_string(RefinementVerdict v) {
  switch (v) {
    case RefinementVerdict::strictly_finer: return "strictly_finer";
    case RefinementVerdict::equal: return "equal";
    case RefinementVerdict::not_comparable: return "not_comparable";
  }
  return "unknown";
}

RefinementRelation refinement_relation(const SpectralForm& fine, const SpectralForm& coarse,
                                       const DensityOperator& rho, const Tolerances& tol) {
  const DetectableSplit coarse_split = require_discrete(coarse, rho, tol);
  const DetectableSplit fine_split = require_discrete(fine, rho, tol);
  const Index n = rho.dim();

  RefinementRelation rel;
  std::vector<bool> placed(fine.branches().size(), false);
  for (const auto& cb : coarse_split.detectable) {
    RefinementCell cell;
    cell.coarse_branch = cb.branch;
    const ComplexMatrix& pc = cb.projector.matrix();
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (std::size_t f = 0; f < fine.branches().size(); ++f) {
      const ComplexMatrix& pf = fine.branches()[f].projector.matrix();
      if ((pc * pf - pf).norm() > tol.inclusion) continue;
      cell.fine_branches.push_back(f);
      sum += pf;
      placed[f] = true;
    }
    for (const auto& fb : fine_split.detectable) {
      if (std::find(cell.fine_branches.begin(), cell.fine_branches.end(), fb.branch) !=
          cell.fine_branches.end()) {
        cell.detectable_fine_branches.push_back(fb.branch);
      }
    }
    cell.sum_residual = (pc - sum).norm();
    rel.mapping.push_back(std::move(cell));
  }

  for (const auto& cell : rel.mapping) {
    if (cell.sum_residual > tol.inclusion) {
      std::ostringstream os;
      os << "coarse branch " << cell.coarse_branch
         << " is not a sum of fine eigenprojectors (residual " << cell.sum_residual << ")";
      rel.reason = os.str();
      return rel;
    }
  }
  for (const auto& fb : fine_split.detectable) {
    if (!placed[fb.branch]) {
      std::ostringstream os;
      os << "detectable fine branch " << fb.branch << " lies in no detectable coarse branch";
      rel.reason = os.str();
      return rel;
    }
  }
  const bool strict = std::any_of(rel.mapping.begin(), rel.mapping.end(), [](const auto& c) {
    return c.detectable_fine_branches.size() >= 2;
  });
  rel.verdict = strict ? RefinementVerdict::strictly_finer : RefinementVerdict::equal;
  return rel;
}

RefinementLedger refinement_entropy_report(const SpectralForm& fine, const SpectralForm& coarse,
                                           const DensityOperator& rho, const Tolerances& tol) {
  RefinementLedger ledger;
  ledger.relation = refinement_relation(fine, coarse, rho, tol);
  if (ledger.relation.verdict == RefinementVerdict::not_comparable) {
    throw PreconditionError("refinement_entropy_report: not a refinement: " + ledger.relation.reason,
                            1.0);
  }
  const EntropyLedger fine_ledger = entropy_balance(fine, rho, tol);
  const EntropyLedger coarse_ledger = entropy_balance(coarse, rho, tol);
  ledger.entropy_fine = fine_ledger.observable_entropy;
  ledger.entropy_coarse = coarse_ledger.observable_entropy;
  ledger.coherence_fine = fine_ledger.coherence_entropy;
  ledger.coherence_coarse = coarse_ledger.coherence_entropy;
  ledger.decrease_fine = fine_ledger.residual;
  ledger.decrease_coarse = coarse_ledger.residual;

  const Index n = rho.dim();
  ComplexMatrix coarse_measured = ComplexMatrix::Zero(n, n);
  for (const auto& cell : ledger.relation.mapping) {
    const ComplexMatrix& p = coarse.branches()[cell.coarse_branch].projector.matrix();
    coarse_measured += p * rho.matrix() * p;
  }

  double grouping = 0.0;
  for (const auto& cell : ledger.relation.mapping) {
    std::vector<double> within;
    double cell_probability = 0.0;
    for (std::size_t f : cell.detectable_fine_branches) {
      const ComplexMatrix& pf = fine.branches()[f].projector.matrix();
      ledger.fine_luders_commutator =
          std::max(ledger.fine_luders_commutator, commutator_norm(pf, coarse_measured));
      const double p = (pf * rho.matrix()).trace().real();
      within.push_back(p);
      cell_probability += p;
      for (std::size_t g : cell.detectable_fine_branches) {
        if (g == f) continue;
        const ComplexMatrix& pg = fine.branches()[g].projector.matrix();
        ledger.cross_term_norm =
            std::max(ledger.cross_term_norm, spectral_norm(pf * rho.matrix() * pg));
      }
    }
    for (double& w : within) w /= cell_probability;
    grouping += cell_probability * shannon_entropy_of(within);
  }
  ledger.grouping_residual = ledger.entropy_fine - ledger.entropy_coarse - grouping;
  return ledger;
}

CompletenessReport completeness(const SpectralForm& a, const DensityOperator& rho,
                                const Tolerances& tol) {
  const DetectableSplit split = require_discrete(a, rho, tol);
  CompletenessReport report;
  report.complete = true;
  for (const auto& b : split.detectable) {
    const ComplexMatrix& p = b.projector.matrix();
    const DensityOperator component =
        DensityOperator::from_trusted(p * rho.matrix() * p / b.probability);
    const double second = second_largest_eigenvalue(component);
    report.second_eigenvalues.push_back(second);
    if (second > tol.purity) report.complete = false;
    report.commutator = std::max(report.commutator, commutator_norm(p, rho.matrix()));
  }
  if (report.commutator <= tol.commutation * rho.spectral_norm()) {
    const Projector q = range_projector(rho, tol.rank);
    bool all_rank_one = true;
    for (const auto& b : split.detectable) {
      Eigen::BDCSVD<ComplexMatrix> svd(b.projector.matrix() * q.matrix());
      const auto& sv = svd.singularValues();
      const Index rank = (sv.array() > 0.5).count();
      if (rank != 1) all_rank_one = false;
    }
    report.range_rank_criterion = all_rank_one;
  }
  return report;
}

bool is_complete(const SpectralForm& a, const DensityOperator& rho, const Tolerances& tol) {
  return completeness(a, rho, tol).complete;
}

}  // namespace twinobs
