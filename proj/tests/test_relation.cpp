#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "twinobs/entropy.hpp"
#include "twinobs/random.hpp"
#include "twinobs/relation.hpp"

using namespace twinobs;

namespace {

constexpr double kLn2 = 0.693147180559945309;
constexpr double kLn3 = 1.098612288668109691;

ComplexMatrix diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return d.cast<Complex>().asDiagonal();
}

SpectralForm diagonal_observable(std::vector<double> labels) {
  const auto n = static_cast<Index>(labels.size());
  return spectral_form_from_basis(labels, ComplexMatrix::Identity(n, n));
}

StateVector ket(std::initializer_list<Complex> v) {
  StateVector s(static_cast<Index>(v.size()));
  Index i = 0;
  for (Complex x : v) s(i++) = x;
  return s.normalized();
}

/// rho = 0.5 |+><+| on span{e0,e1} + 0.5 diag(0.6, 0.4) on span{e2,e3}.
DensityOperator intermediary_state() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m.topLeftCorner(2, 2) << 0.25, 0.25, 0.25, 0.25;
  m(2, 2) = 0.3;
  m(3, 3) = 0.2;
  return DensityOperator(m);
}

}  // namespace

TEST_CASE("detectable_split") {
  const DetectableSplit a = detectable_split(diagonal_observable({1, -1}), DensityOperator(diag({1, 0})));
  REQUIRE(a.detectable.size() == 1);
  CHECK(a.detectable[0].eigenvalue == 1.0);
  REQUIRE(a.undetectable.size() == 1);
  CHECK(a.undetectable[0].eigenvalue == -1.0);

  Rng rng(8);
  const DetectableSplit full = detectable_split(random_observable({1, 1, 1}, rng), random_density(3, 3, rng));
  CHECK(full.undetectable.empty());
  CHECK(full.total_probability == doctest::Approx(1.0));

  const DetectableSplit b = detectable_split(diagonal_observable({1, 2, 3}), DensityOperator(diag({0.5, 0.5, 0})));
  CHECK(b.detectable.size() == 2);
  REQUIRE(b.undetectable.size() == 1);
  CHECK(b.undetectable[0].eigenvalue == 3.0);
  CHECK((b.certain_projector.matrix() - diag({1, 1, 0})).norm() < 1e-14);
}

TEST_CASE("validate_relative_discreteness") {
  Rng rng(2);
  CHECK(validate_relative_discreteness(random_observable({2, 1}, rng), random_density(3, 2, rng)).certain);

  const std::vector<SpectralBranch> only_zero{{1.0, Projector::onto(StateVector::Unit(2, 0))}};
  const CertaintyReport half = validate_relative_discreteness(std::span<const SpectralBranch>(only_zero), DensityOperator(diag({0.5, 0.5})));
  CHECK_FALSE(half.certain);
  CHECK(half.probability == doctest::Approx(0.5));
  CHECK(validate_relative_discreteness(std::span<const SpectralBranch>(only_zero), DensityOperator(diag({1, 0}))).certain);

  const std::vector<SpectralBranch> overlapping{{1.0, Projector::identity(2)},
                                                {2.0, Projector::onto(StateVector::Unit(2, 0))}};
  CHECK_THROWS_AS(validate_relative_discreteness(std::span<const SpectralBranch>(overlapping), DensityOperator(diag({1, 0}))), InputError);
}

TEST_CASE("weak_strong_decompose") {
  SUBCASE("pure state makes every nondegenerate observable weak") {
    const DensityOperator rho = DensityOperator::pure(ket({1.0, 1.0, Complex(0, 1)}));
    const WeakStrongDecomposition d = weak_strong_decompose(diagonal_observable({1, 2, 3}), rho);
    CHECK(d.regime == Regime::weak);
    CHECK(d.weak_probability == doctest::Approx(1.0));
    CHECK(d.recomposition_residual(rho) < 1e-14);
  }
  SUBCASE("compatible observable is strong") {
    const DensityOperator rho(diag({0.2, 0.3, 0.5}));
    const WeakStrongDecomposition d = weak_strong_decompose(diagonal_observable({1, 2, 3}), rho);
    CHECK(d.regime == Regime::strong);
    CHECK(d.weak_probability == 0.0);
    CHECK_FALSE(d.weak_observable().has_value());
    CHECK(d.recomposition_residual(rho) < 1e-14);
  }
  SUBCASE("block state with one coherent and one incoherent sector") {
    const DensityOperator rho = intermediary_state();
    const WeakStrongDecomposition d = weak_strong_decompose(diagonal_observable({1, 2, 3, 4}), rho);
    CHECK(d.regime == Regime::intermediary);
    CHECK(d.weak_probability == doctest::Approx(0.5));
    CHECK(d.weak_branches.size() == 2);
    CHECK(d.strong_branches.size() == 2);
    CHECK(d.recomposition_residual(rho) < 1e-14);
  }
}

TEST_CASE("weak_coherence_sides") {
  const WeakCoherenceSides strong =
      weak_coherence_sides(diagonal_observable({1, 2}), DensityOperator(diag({0.4, 0.6})));
  CHECK(strong.lhs == doctest::Approx(0.0));
  CHECK(strong.rhs == 0.0);

  const DensityOperator pure = DensityOperator::pure(ket({1.0, 2.0, 3.0}));
  const SpectralForm a = diagonal_observable({1, 2, 3});
  const WeakCoherenceSides p = weak_coherence_sides(a, pure);
  CHECK(p.lhs == doctest::Approx(coherence_entropy(a, pure)));
  CHECK(std::abs(p.lhs - p.rhs) < 1e-12);

  const WeakCoherenceSides mid = weak_coherence_sides(diagonal_observable({1, 2, 3, 4}), intermediary_state());
  CHECK(std::abs(mid.lhs - 0.5 * kLn2) < 1e-12);
  CHECK(std::abs(mid.rhs - 0.5 * kLn2) < 1e-12);
  CHECK(mid.regime == Regime::intermediary);
}

TEST_CASE("refinement_relation") {
  const DensityOperator mixed4(ComplexMatrix::Identity(4, 4) / 4.0);
  SUBCASE("an observable refines itself trivially") {
    const SpectralForm a = diagonal_observable({1, 2, 2, 3});
    const RefinementRelation r = refinement_relation(a, a, mixed4);
    CHECK(r.verdict == RefinementVerdict::equal);
    for (const auto& cell : r.mapping) {
      CHECK(cell.fine_branches == std::vector<std::size_t>{cell.coarse_branch});
    }
  }
  SUBCASE("basis observable refines a degenerate one") {
    const RefinementRelation r = refinement_relation(diagonal_observable({1, 2, 3, 4}),
                                                     diagonal_observable({1, 1, 2, 2}), mixed4);
    CHECK(r.verdict == RefinementVerdict::strictly_finer);
  }
  SUBCASE("incompatible bases are not comparable") {
    const ComplexMatrix hadamard =
        (ComplexMatrix(2, 2) << 1, 1, 1, -1).finished() / std::sqrt(2.0);
    const std::vector<double> labels{1.0, -1.0};
    const SpectralForm x = spectral_form_from_basis(labels, hadamard);
    const RefinementRelation r =
        refinement_relation(x, diagonal_observable({1, -1}), DensityOperator(diag({0.5, 0.5})));
    CHECK(r.verdict == RefinementVerdict::not_comparable);
    CHECK_FALSE(r.reason.empty());
  }
  SUBCASE("undetectable fine branches inside a coarse one do not make it strict") {
    const RefinementRelation r = refinement_relation(diagonal_observable({1, 2, 3}),
                                                     diagonal_observable({1, 1, 2}),
                                                     DensityOperator(diag({1, 0, 0})));
    CHECK(r.verdict == RefinementVerdict::equal);
  }
  SUBCASE("fine branches straddling a detectable and an undetectable coarse branch") {
    ComplexMatrix basis = ComplexMatrix::Zero(3, 3);
    basis(0, 0) = 1.0;
    basis(1, 1) = basis(2, 1) = basis(1, 2) = 1.0 / std::sqrt(2.0);
    basis(2, 2) = -1.0 / std::sqrt(2.0);
    const std::vector<double> labels{1.0, 2.0, 3.0};
    const RefinementRelation r =
        refinement_relation(spectral_form_from_basis(labels, basis), diagonal_observable({1, 1, 2}),
                            DensityOperator(diag({1, 0, 0})));
    CHECK(r.verdict == RefinementVerdict::not_comparable);
  }
}

TEST_CASE("refinement_entropy_report") {
  SUBCASE("refinement that commutes with the coarse Lueders state") {
    const StateVector psi = ket({1, 0, 1, 0});
    const StateVector chi = ket({0, 1, 0, 1});
    const DensityOperator rho(0.5 * psi * psi.adjoint() + 0.5 * chi * chi.adjoint());
    const RefinementLedger l =
        refinement_entropy_report(diagonal_observable({1, 2, 3, 4}), diagonal_observable({1, 1, 2, 2}), rho);
    CHECK(l.relation.verdict == RefinementVerdict::strictly_finer);
    CHECK(l.entropy_fine - l.entropy_coarse == doctest::Approx(kLn2));
    CHECK(std::abs(l.coherence_fine - l.coherence_coarse) < 1e-12);
    CHECK(l.fine_luders_commutator < 1e-12);
    CHECK(l.cross_term_norm < 1e-12);
    CHECK(l.decrease_fine - l.decrease_coarse == doctest::Approx(kLn2));
    CHECK(std::abs(l.grouping_residual) < 1e-12);
  }
  SUBCASE("coherent cross terms raise the coherence entropy") {
    const DensityOperator rho = DensityOperator::pure(ket({1, 1, 1}));
    const RefinementLedger l =
        refinement_entropy_report(diagonal_observable({1, 2, 3}), diagonal_observable({1, 1, 2}), rho);
    CHECK(std::abs(l.coherence_coarse - 0.636514168294812818) < 1e-12);
    CHECK(std::abs(l.coherence_fine - kLn3) < 1e-12);
    CHECK(l.cross_term_norm > 0.1);
    std::vector<oracle::Matrix> fine{oracle::basis_projector(3, {0}), oracle::basis_projector(3, {1}),
                                     oracle::basis_projector(3, {2})};
    CHECK(std::abs(l.coherence_fine - oracle::coherence_entropy(rho.matrix(), fine)) < 1e-12);
  }
  SUBCASE("not a refinement") {
    const ComplexMatrix hadamard = (ComplexMatrix(2, 2) << 1, 1, 1, -1).finished() / std::sqrt(2.0);
    const std::vector<double> labels{1.0, -1.0};
    CHECK_THROWS_AS(refinement_entropy_report(spectral_form_from_basis(labels, hadamard),
                                              diagonal_observable({1, -1}), DensityOperator(diag({0.5, 0.5}))),
                    PreconditionError);
  }
}

TEST_CASE("completeness") {
  CHECK(is_complete(diagonal_observable({1, -1}), DensityOperator(diag({0.5, 0.5}))));
  const SpectralForm identity({{1.0, Projector::identity(2)}});
  CHECK_FALSE(is_complete(identity, DensityOperator(diag({0.5, 0.5}))));
  CHECK(is_complete(identity, DensityOperator::pure(ket({1, Complex(0, 1)}))));

  const CompletenessReport r = completeness(diagonal_observable({1, 2, 2}), DensityOperator(diag({0.5, 0.3, 0.2})));
  CHECK_FALSE(r.complete);
  REQUIRE(r.range_rank_criterion.has_value());
  CHECK(r.cross_check_agrees());
}

TEST_CASE("property: completeness agrees with the range-rank criterion for compatible pairs") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = rng.integer(2, 8);
    const ComplexMatrix u = random_unitary(d, rng);
    // Compatible pair: the state is diagonal in a basis adapted to A.
    const std::vector<Index> sizes = random_composition(d, rng.integer(1, d), rng);
    const SpectralForm a = random_observable(sizes, u, rng);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    for (Index i = 0; i < d; ++i)
      if (rng.integer(0, 2) > 0) w(i) = rng.uniform(0.1, 1.0);
    if (w.sum() == 0.0) w(0) = 1.0;
    w /= w.sum();
    const DensityOperator rho(u * w.cast<Complex>().asDiagonal() * u.adjoint());
    const CompletenessReport r = completeness(a, rho);
    CAPTURE(trial);
    REQUIRE(r.range_rank_criterion.has_value());
    CHECK(r.cross_check_agrees());
  }
}
