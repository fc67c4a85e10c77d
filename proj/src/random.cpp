#include "twinobs/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace twinobs {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

Index Rng::integer(Index lo, Index hi) {
  if (hi < lo) throw DomainError("Rng::integer: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return lo + static_cast<Index>(x % span);
}

double Rng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex(re, im) * std::numbers::sqrt2 * 0.5;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ index) ^ (stream * 0xd6e8feb86659fd93ULL));
}

ComplexMatrix random_gaussian_matrix(Index rows, Index cols, Rng& rng) {
  ComplexMatrix g(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) g(r, c) = rng.complex_normal();
  return g;
}

ComplexMatrix random_isometry(Index rows, Index cols, Rng& rng) {
  if (cols < 0 || cols > rows) throw DomainError("random_isometry: need cols <= rows");
  const ComplexMatrix g = random_gaussian_matrix(rows, cols, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(rows, cols);
  const ComplexMatrix r = qr.matrixQR();
  for (Index k = 0; k < cols; ++k) {
    const Complex d = r(k, k);
    if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

ComplexMatrix random_unitary(Index dim, Rng& rng) { return random_isometry(dim, dim, rng); }

DensityOperator random_density(Index dim, Index rank, Rng& rng, std::optional<BipartiteDims> dims) {
  if (rank < 1 || rank > dim) {
    std::ostringstream os;
    os << "random_density: rank " << rank << " outside [1, " << dim << "]";
    throw DomainError(os.str());
  }
  const ComplexMatrix g = random_gaussian_matrix(dim, rank, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityOperator(rho, dims);
}

DensityOperator random_density(Index dim, Index rank, std::uint64_t seed,
                               std::optional<BipartiteDims> dims) {
  Rng rng(seed);
  return random_density(dim, rank, rng, dims);
}

StateVector random_pure_bipartite(Index d1, Index d2, Rng& rng, std::optional<Index> schmidt_rank) {
  if (d1 < 1 || d2 < 1) throw DomainError("random_pure_bipartite: dimensions must be positive");
  if (!schmidt_rank) {
    StateVector phi = random_gaussian_matrix(d1 * d2, 1, rng);
    return phi / phi.norm();
  }
  const Index r = *schmidt_rank;
  if (r < 1 || r > std::min(d1, d2)) {
    std::ostringstream os;
    os << "random_pure_bipartite: Schmidt rank " << r << " outside [1, " << std::min(d1, d2)
       << "]";
    throw DomainError(os.str());
  }
  const ComplexMatrix u = random_isometry(d1, r, rng);
  const ComplexMatrix v = random_isometry(d2, r, rng);
  const std::vector<double> weights = random_distribution(static_cast<std::size_t>(r), rng);
  StateVector phi = StateVector::Zero(d1 * d2);
  for (Index k = 0; k < r; ++k) {
    phi += std::sqrt(weights[static_cast<std::size_t>(k)]) * tensor_product(u.col(k), v.col(k));
  }
  return phi / phi.norm();
}

StateVector random_pure_bipartite(Index d1, Index d2, std::uint64_t seed,
                                  std::optional<Index> schmidt_rank) {
  Rng rng(seed);
  return random_pure_bipartite(d1, d2, rng, schmidt_rank);
}

std::vector<double> random_distribution(std::size_t n, Rng& rng, double floor) {
  if (n == 0) throw DomainError("random_distribution: empty");
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& x : w) {
    x = -std::log(1.0 - rng.uniform());
    sum += x;
  }
  const double base = floor / static_cast<double>(n);
  for (auto& x : w) x = base + (1.0 - floor) * x / sum;
  return w;
}

std::vector<Index> random_composition(Index total, Index parts, Rng& rng) {
  if (parts < 1 || parts > total) throw DomainError("random_composition: need 1 <= parts <= total");
  std::vector<Index> sizes(static_cast<std::size_t>(parts), 1);
  for (Index extra = total - parts; extra > 0; --extra) {
    ++sizes[static_cast<std::size_t>(rng.integer(0, parts - 1))];
  }
  return sizes;
}

std::vector<double> random_spectrum(std::size_t n, Rng& rng) {
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = static_cast<double>(k) + rng.uniform(0.0, 0.5);
  for (std::size_t k = n; k > 1; --k) {
    std::swap(values[k - 1], values[static_cast<std::size_t>(rng.integer(0, static_cast<Index>(k) - 1))]);
  }
  const double shift = static_cast<double>(n) / 2.0;
  for (auto& v : values) v -= shift;
  return values;
}

SpectralForm random_observable(const std::vector<Index>& multiplicities, const ComplexMatrix& basis,
                               Rng& rng) {
  Index dim = 0;
  for (Index m : multiplicities) {
    if (m < 1) throw DomainError("random_observable: multiplicities must be positive");
    dim += m;
  }
  if (basis.rows() != dim || basis.cols() != dim) {
    throw DimensionError("random_observable: basis does not match the multiplicities");
  }
  const std::vector<double> values = random_spectrum(multiplicities.size(), rng);
  std::vector<SpectralBranch> branches;
  Index offset = 0;
  for (std::size_t k = 0; k < multiplicities.size(); ++k) {
    const ComplexMatrix cols = basis.middleCols(offset, multiplicities[k]);
    branches.push_back({values[k], Projector::from_orthonormal_columns(cols)});
    offset += multiplicities[k];
  }
  return SpectralForm(std::move(branches));
}

SpectralForm random_observable(const std::vector<Index>& multiplicities, Rng& rng) {
  Index dim = 0;
  for (Index m : multiplicities) dim += m;
  const ComplexMatrix basis = random_unitary(dim, rng);
  return random_observable(multiplicities, basis, rng);
}

}  // namespace twinobs
