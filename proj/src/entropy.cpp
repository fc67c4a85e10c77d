#include "twinobs/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "twinobs/relation.hpp"

namespace twinobs {

ProbabilityVector::ProbabilityVector(std::vector<double> weights, double sum_tol)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw InputError("ProbabilityVector: empty");
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      std::ostringstream os;
      os << "ProbabilityVector: invalid weight " << w;
      throw DomainError(os.str());
    }
  }
  const double sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(sum - 1.0) > sum_tol) {
    std::ostringstream os;
    os.precision(17);
    os << "ProbabilityVector: weights sum to " << sum;
    throw InputError(os.str());
  }
}

double shannon_entropy_of(std::span<const double> weights) {
  double h = 0.0;
  for (double w : weights) {
    if (w > 0.0) h -= w * std::log(w);
  }
  return h;
}

double shannon_entropy(const ProbabilityVector& p) {
  return shannon_entropy_of(p.weights());
}

double von_neumann_entropy(const DensityOperator& rho, double rank_tol, Warnings* warnings) {
  const Eigen::VectorXd& values = rho.eigenvalues();
  if (warnings && values(0) < -1e-12) {
    std::ostringstream os;
    os << "von_neumann_entropy: clamped eigenvalue " << values(0) << " to zero";
    warnings->push_back(os.str());
  }
  double s = 0.0;
  for (Index i = 0; i < values.size(); ++i) {
    const double v = values(i);
    if (v > rank_tol) s -= v * std::log(v);
  }
  return s;
}

DensityOperator luders_state(const DensityOperator& rho, std::span<const Projector> projectors,
                             const Tolerances& tol) {
  const Index n = rho.dim();
  ComplexMatrix support = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    if (projectors[i].dim() != n) throw DimensionError("luders_state: projector dimension mismatch");
    for (std::size_t j = i + 1; j < projectors.size(); ++j) {
      const double overlap = (projectors[i].matrix() * projectors[j].matrix()).norm();
      if (overlap > tol.inclusion) {
        std::ostringstream os;
        os << "luders_state: projectors " << i << " and " << j << " are not orthogonal ("
           << overlap << ")";
        throw InputError(os.str());
      }
    }
    support += projectors[i].matrix();
  }
  const double probability = (support * rho.matrix()).trace().real();
  if (probability < 1.0 - tol.certainty) {
    std::ostringstream os;
    os.precision(17);
    os << "luders_state: projector sum is not certain in the state (probability " << probability
       << ")";
    throw PreconditionError(os.str(), 1.0 - probability);
  }
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (const auto& p : projectors) out += p.matrix() * rho.matrix() * p.matrix();
  return DensityOperator::from_trusted(out, rho.bipartite_dims());
}

double coherence_entropy(const SpectralForm& a, const DensityOperator& rho, const Tolerances& tol) {
  const DetectableSplit split = require_discrete(a, rho, tol);
  const DensityOperator measured = luders_state(rho, split.detectable_projectors(), tol);
  return von_neumann_entropy(measured, tol.rank) - von_neumann_entropy(rho, tol.rank);
}

double observable_entropy(const SpectralForm& a, const DensityOperator& rho,
                          const Tolerances& tol) {
  const DetectableSplit split = require_discrete(a, rho, tol);
  return shannon_entropy_of(split.probabilities());
}

double EntropyLedger::balance_residual() const {
  return std::abs(observable_entropy - coherence_entropy - residual);
}

double EntropyLedger::sandwich_violation() const {
  return std::max({0.0, avg_component_entropy - state_entropy, state_entropy - luders_entropy});
}

bool EntropyLedger::consistent(double balance_tol, double order_tol) const {
  return balance_residual() <= balance_tol && coherence_entropy >= -order_tol &&
         residual >= -order_tol && sandwich_violation() <= order_tol;
}

EntropyLedger entropy_balance(const SpectralForm& a, const DensityOperator& rho,
                              const Tolerances& tol) {
  const DetectableSplit split = require_discrete(a, rho, tol);
  EntropyLedger ledger;
  ledger.probabilities = split.probabilities();
  ledger.observable_entropy = shannon_entropy_of(ledger.probabilities);
  ledger.state_entropy = von_neumann_entropy(rho, tol.rank);
  ledger.luders_entropy =
      von_neumann_entropy(luders_state(rho, split.detectable_projectors(), tol), tol.rank);
  ledger.coherence_entropy = ledger.luders_entropy - ledger.state_entropy;
  for (const auto& b : split.detectable) {
    const ComplexMatrix& p = b.projector.matrix();
    const DensityOperator component =
        DensityOperator::from_trusted(p * rho.matrix() * p / b.probability);
    ledger.avg_component_entropy += b.probability * von_neumann_entropy(component, tol.rank);
  }
  ledger.residual = ledger.state_entropy - ledger.avg_component_entropy;
  return ledger;
}

double mutual_information(const DensityOperator& rho12, double rank_tol) {
  if (!rho12.bipartite_dims()) {
    throw ConfigurationError("mutual_information: state carries no bipartite dimensions");
  }
  const double s1 = von_neumann_entropy(partial_trace(rho12, Subsystem::first), rank_tol);
  const double s2 = von_neumann_entropy(partial_trace(rho12, Subsystem::second), rank_tol);
  return s1 + s2 - von_neumann_entropy(rho12, rank_tol);
}

MixtureAverageResult mixture_average_check(const SpectralForm& a, const DensityOperator& rho,
                                           const HermitianOperator& b, double tol) {
  if (a.dim() != rho.dim() || b.dim() != rho.dim()) {
    throw DimensionError("mixture_average_check: dimension mismatch");
  }
  const double lhs = (rho.matrix() * b.matrix()).trace().real();
  double rhs = 0.0;
  for (const auto& branch : a.branches()) {
    const ComplexMatrix& p = branch.projector.matrix();
    rhs += (p * rho.matrix() * p * b.matrix()).trace().real();
  }
  const double discrepancy = std::abs(lhs - rhs);
  return {lhs, rhs, discrepancy, discrepancy <= tol, b};
}

}  // namespace twinobs
