#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "twinobs/entropy.hpp"
#include "twinobs/random.hpp"

using namespace twinobs;

namespace {

constexpr double kLn2 = 0.693147180559945309;

ComplexMatrix diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return d.cast<Complex>().asDiagonal();
}

SpectralForm diagonal_observable(std::initializer_list<double> values) {
  const std::vector<double> labels(values);
  const auto n = static_cast<Index>(labels.size());
  return spectral_form_from_basis(labels, ComplexMatrix::Identity(n, n));
}

DensityOperator plus_state() {
  StateVector plus(2);
  plus << 1.0, 1.0;
  return DensityOperator::pure(plus / std::sqrt(2.0));
}

}  // namespace

TEST_CASE("shannon_entropy") {
  CHECK(shannon_entropy(ProbabilityVector({1.0, 0.0})) == 0.0);
  CHECK(shannon_entropy(ProbabilityVector({0.5, 0.5})) == doctest::Approx(kLn2).epsilon(1e-15));
  CHECK(std::abs(shannon_entropy(ProbabilityVector({0.8, 0.2})) - 0.500402423538187879) < 1e-15);
}

TEST_CASE("ProbabilityVector validation") {
  CHECK_THROWS_AS(ProbabilityVector({0.5, -0.1, 0.6}), DomainError);
  CHECK_THROWS_AS(ProbabilityVector({0.5, std::nan("")}), DomainError);
  CHECK_THROWS_AS(ProbabilityVector({0.5, 0.4}), InputError);
  CHECK_THROWS_AS(ProbabilityVector(std::vector<double>{}), InputError);
}

TEST_CASE("von_neumann_entropy") {
  CHECK(von_neumann_entropy(plus_state()) == doctest::Approx(0.0));
  CHECK(von_neumann_entropy(DensityOperator(diag({0.5, 0.5}))) == doctest::Approx(kLn2));
  CHECK(std::abs(von_neumann_entropy(DensityOperator(diag({0.8, 0.2}))) - 0.500402423538187879) <
        1e-14);

  Warnings notes;
  const DensityOperator slightly_negative =
      DensityOperator::from_trusted(diag({1.0 + 1e-11, -1e-11}));
  von_neumann_entropy(slightly_negative, 1e-10, &notes);
  CHECK(notes.size() == 1);
}

TEST_CASE("luders_state") {
  SUBCASE("commuting projectors leave the state unchanged") {
    const DensityOperator rho(diag({0.3, 0.7}));
    const std::vector<Projector> ps{Projector::onto(StateVector::Unit(2, 0)),
                                    Projector::onto(StateVector::Unit(2, 1))};
    CHECK((luders_state(rho, ps).matrix() - rho.matrix()).norm() < 1e-15);
  }
  SUBCASE("plus state dephases to the maximally mixed state") {
    const std::vector<Projector> ps{Projector::onto(StateVector::Unit(2, 0)),
                                    Projector::onto(StateVector::Unit(2, 1))};
    CHECK((luders_state(plus_state(), ps).matrix() - diag({0.5, 0.5})).norm() < 1e-15);
  }
  SUBCASE("Bell state measured on subsystem 1") {
    StateVector phi = StateVector::Zero(4);
    phi(0) = phi(3) = 1.0 / std::numbers::sqrt2;
    const BipartiteDims dims{2, 2};
    const DensityOperator bell = DensityOperator::pure(phi, dims);
    const std::vector<Projector> ps{embed(Projector::onto(StateVector::Unit(2, 0)), dims, Subsystem::first),
                                    embed(Projector::onto(StateVector::Unit(2, 1)), dims, Subsystem::first)};
    const DensityOperator out = luders_state(bell, ps);
    CHECK((out.matrix() - diag({0.5, 0, 0, 0.5})).norm() < 1e-15);
    CHECK(out.bipartite_dims() == dims);
  }
  SUBCASE("errors") {
    const Projector p0 = Projector::onto(StateVector::Unit(2, 0));
    const std::vector<Projector> overlapping{p0, Projector::identity(2)};
    CHECK_THROWS_AS(luders_state(plus_state(), overlapping), InputError);
    const std::vector<Projector> partial{p0};
    try {
      luders_state(plus_state(), partial);
      FAIL("expected a precondition failure");
    } catch (const PreconditionError& e) {
      CHECK(e.deficit() == doctest::Approx(0.5));
    }
  }
}

TEST_CASE("coherence_entropy") {
  const SpectralForm z = diagonal_observable({1.0, -1.0});
  CHECK(coherence_entropy(z, DensityOperator(diag({0.3, 0.7}))) == doctest::Approx(0.0));
  CHECK(coherence_entropy(z, plus_state()) == doctest::Approx(kLn2).epsilon(1e-14));

  // 0.5 |+><+| + 0.5 |0><0|: reference value from an independent
  // high-precision evaluation.
  const DensityOperator rho(0.5 * plus_state().matrix() + 0.5 * diag({1, 0}));
  CHECK(std::abs(coherence_entropy(z, rho) - 0.145839613919120900) < 1e-13);
  const std::vector<oracle::Matrix> ps{oracle::basis_projector(2, {0}), oracle::basis_projector(2, {1})};
  CHECK(std::abs(coherence_entropy(z, rho) - oracle::coherence_entropy(rho.matrix(), ps)) < 1e-12);
}

TEST_CASE("observable_entropy") {
  const SpectralForm z = diagonal_observable({1.0, -1.0});
  CHECK(observable_entropy(z, plus_state()) == doctest::Approx(kLn2));
  CHECK(observable_entropy(z, DensityOperator(diag({1, 0}))) == 0.0);
  const SpectralForm a = diagonal_observable({1.0, 1.0, 2.0});
  CHECK(std::abs(observable_entropy(a, DensityOperator(ComplexMatrix::Identity(3, 3) / 3.0)) -
                 0.636514168294812818) < 1e-14);
}

TEST_CASE("entropy_balance") {
  SUBCASE("compatible observable has no coherence entropy") {
    const EntropyLedger l = entropy_balance(diagonal_observable({1, 2, 3}), DensityOperator(diag({0.2, 0.3, 0.5})));
    CHECK(l.coherence_entropy == doctest::Approx(0.0));
    CHECK(l.observable_entropy == doctest::Approx(l.state_entropy - l.avg_component_entropy));
    CHECK(l.consistent());
  }
  SUBCASE("pure state: all of S(A) is coherence") {
    Rng rng(9);
    const DensityOperator rho = random_density(4, 1, rng);
    const EntropyLedger l = entropy_balance(random_observable({2, 1, 1}, rng), rho);
    CHECK(l.avg_component_entropy == doctest::Approx(0.0));
    CHECK(l.state_entropy == doctest::Approx(0.0));
    CHECK(l.observable_entropy == doctest::Approx(l.coherence_entropy));
  }
  SUBCASE("undetectable branches are left out") {
    const EntropyLedger l = entropy_balance(diagonal_observable({1, 2, 3}), DensityOperator(diag({0.5, 0.5, 0})));
    CHECK(l.probabilities.size() == 2);
    CHECK(l.observable_entropy == doctest::Approx(kLn2));
  }
  SUBCASE("partial spectral form must be certain in the state") {
    const Projector p0 = Projector::onto(StateVector::Unit(2, 0));
    const SpectralForm partial({{1.0, p0}}, HermitianOperator(diag({0, 0})));
    CHECK_NOTHROW(entropy_balance(partial, DensityOperator(diag({1, 0}))));
    CHECK_THROWS_AS(entropy_balance(partial, DensityOperator(diag({0.5, 0.5}))), PreconditionError);
  }
}

TEST_CASE("mutual_information") {
  const BipartiteDims dims{2, 2};
  Rng rng(1);
  const DensityOperator product(
      tensor_product(random_density(2, 2, rng).matrix(), random_density(2, 1, rng).matrix()), dims);
  CHECK(std::abs(mutual_information(product)) < 1e-12);
  StateVector phi = StateVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::numbers::sqrt2;
  CHECK(mutual_information(DensityOperator::pure(phi, dims)) == doctest::Approx(2 * kLn2));
  CHECK(mutual_information(DensityOperator(diag({0.5, 0, 0, 0.5}), dims)) == doctest::Approx(kLn2));
  CHECK_THROWS_AS(mutual_information(DensityOperator(diag({0.5, 0.5}))), ConfigurationError);
}

TEST_CASE("mixture_average_check") {
  const SpectralForm z = diagonal_observable({1.0, -1.0});
  Rng rng(5);
  const DensityOperator rho = random_density(2, 2, rng);
  CHECK(mixture_average_check(z, rho, HermitianOperator(diag({3, -2}))).equal);
  CHECK(mixture_average_check(z, DensityOperator(diag({0.4, 0.6})),
                              HermitianOperator(random_gaussian_matrix(2, 2, rng) +
                                                random_gaussian_matrix(2, 2, rng).adjoint(), 10))
            .equal);
  ComplexMatrix sx(2, 2);
  sx << 0, 1, 1, 0;
  const MixtureAverageResult r = mixture_average_check(z, plus_state(), HermitianOperator(sx));
  CHECK(r.lhs == doctest::Approx(1.0));
  CHECK(r.rhs == doctest::Approx(0.0));
  CHECK_FALSE(r.equal);
}

TEST_CASE("property: ledger terms against the brute-force oracle") {
  Rng rng(314);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = rng.integer(2, 8);
    const std::vector<Index> sizes = random_composition(d, rng.integer(1, d), rng);
    const SpectralForm a = random_observable(sizes, rng);
    const DensityOperator rho = random_density(d, rng.integer(1, d), rng);
    const EntropyLedger l = entropy_balance(a, rho);

    std::vector<oracle::Matrix> ps;
    std::vector<double> probs;
    double avg = 0.0;
    for (const auto& b : a.branches()) {
      const oracle::Matrix& p = b.projector.matrix();
      ps.push_back(p);
      const double prob = (p * rho.matrix()).trace().real();
      probs.push_back(prob);
      if (prob > 1e-10) avg += prob * oracle::entropy(p * rho.matrix() * p / prob);
    }
    CAPTURE(trial);
    CHECK(std::abs(l.state_entropy - oracle::entropy(rho.matrix())) < 1e-10);
    CHECK(std::abs(l.coherence_entropy - oracle::coherence_entropy(rho.matrix(), ps)) < 1e-10);
    CHECK(std::abs(l.observable_entropy - oracle::shannon(probs)) < 1e-12);
    CHECK(std::abs(l.avg_component_entropy - avg) < 1e-10);
    CHECK(l.balance_residual() <= 1e-8);
    CHECK(l.sandwich_violation() <= 1e-10);
    CHECK(l.observable_entropy >= l.coherence_entropy - 1e-10);
  }
}
