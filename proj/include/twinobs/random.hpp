#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "twinobs/operator_core.hpp"

namespace twinobs {

/// Deterministic generator: std::mt19937_64 for the bit stream (its output
/// sequence is fixed by the standard), with uniform and normal variates
/// computed here rather than by the implementation-defined std::
/// distributions, so the same seed gives the same numbers everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  Index integer(Index lo, Index hi);
  /// Standard normal via Box-Muller.
  double normal();
  /// Complex normal with E|z|^2 = 1.
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Independent seed for sub-stream `stream` of item `index`, by splitmix64.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream = 0);

ComplexMatrix random_gaussian_matrix(Index rows, Index cols, Rng& rng);

/// Haar-distributed unitary (QR of a Gaussian matrix with phases fixed).
ComplexMatrix random_unitary(Index dim, Rng& rng);

/// rows x cols matrix with orthonormal columns.
ComplexMatrix random_isometry(Index rows, Index cols, Rng& rng);

/// rho = G G^dagger / Tr(G G^dagger) for a dim x rank Gaussian G.
/// DomainError unless 1 <= rank <= dim.
DensityOperator random_density(Index dim, Index rank, Rng& rng,
                               std::optional<BipartiteDims> dims = std::nullopt);
DensityOperator random_density(Index dim, Index rank, std::uint64_t seed,
                               std::optional<BipartiteDims> dims = std::nullopt);

/// Unit vector on C^d1 (x) C^d2. With `schmidt_rank` the Schmidt
/// coefficients are drawn bounded away from zero, so exactly that many
/// exceed 1e-10. DomainError if the rank is outside [1, min(d1, d2)].
StateVector random_pure_bipartite(Index d1, Index d2, Rng& rng,
                                  std::optional<Index> schmidt_rank = std::nullopt);
StateVector random_pure_bipartite(Index d1, Index d2, std::uint64_t seed,
                                  std::optional<Index> schmidt_rank = std::nullopt);

/// Probability vector of length n with every entry at least floor / n.
std::vector<double> random_distribution(std::size_t n, Rng& rng, double floor = 0.1);

/// Random positive integers summing to `total`, `parts` of them.
std::vector<Index> random_composition(Index total, Index parts, Rng& rng);

/// Observable with eigenspace dimensions `multiplicities` (summing to its
/// dimension) in a Haar-random basis, and well separated eigenvalues.
SpectralForm random_observable(const std::vector<Index>& multiplicities, Rng& rng);
SpectralForm random_observable(const std::vector<Index>& multiplicities,
                               const ComplexMatrix& basis, Rng& rng);

/// Distinct eigenvalues in [-n, n] at least 0.5 apart, in random order.
std::vector<double> random_spectrum(std::size_t n, Rng& rng);

}  // namespace twinobs
