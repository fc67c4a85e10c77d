#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "twinobs/operator_core.hpp"
#include "twinobs/random.hpp"

using namespace twinobs;

namespace {

const Complex I1(0.0, 1.0);

ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ComplexMatrix diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return d.cast<Complex>().asDiagonal();
}

StateVector bell() {
  StateVector phi = StateVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::numbers::sqrt2;
  return phi;
}

}  // namespace

TEST_CASE("hermitian_check") {
  CHECK(hermitian_check(ComplexMatrix::Identity(2, 2), 1e-10));
  CHECK(hermitian_check(mat2(0, 1, 1, 0), 1e-10));
  CHECK_FALSE(hermitian_check(mat2(0, I1, I1, 0), 1e-10));
  CHECK(hermitian_check(mat2(0, I1, -I1, 0), 1e-10));
  CHECK_THROWS_AS(hermitian_check(ComplexMatrix::Zero(2, 3), 1e-10), DimensionError);
}

TEST_CASE("spectral_decompose on diagonal operators") {
  SUBCASE("nondegenerate") {
    const SpectralForm f = spectral_decompose(HermitianOperator(diag({1, -1})));
    REQUIRE(f.branches().size() == 2);
    for (const auto& b : f.branches()) {
      const Index idx = b.eigenvalue > 0 ? 0 : 1;
      CHECK(b.projector.rank() == 1);
      CHECK(std::abs(b.projector.matrix()(idx, idx) - 1.0) < 1e-12);
    }
  }
  SUBCASE("fully degenerate") {
    const SpectralForm f = spectral_decompose(HermitianOperator(ComplexMatrix::Identity(2, 2)));
    REQUIRE(f.branches().size() == 1);
    CHECK(f.branches()[0].eigenvalue == doctest::Approx(1.0));
    CHECK(f.branches()[0].projector.rank() == 2);
  }
  SUBCASE("partially degenerate") {
    const SpectralForm f = spectral_decompose(HermitianOperator(diag({1, 1, 2})));
    REQUIRE(f.branches().size() == 2);
    for (const auto& b : f.branches()) {
      CHECK(b.projector.rank() == (std::abs(b.eigenvalue - 1.0) < 1e-9 ? 2 : 1));
    }
  }
}

TEST_CASE("spectral_decompose clusters near-degenerate eigenvalues") {
  const SpectralForm f = spectral_decompose(HermitianOperator(diag({1.0, 1.0 + 1e-12, 3.0})));
  CHECK(f.branches().size() == 2);
  const SpectralForm split = spectral_decompose(HermitianOperator(diag({1.0, 1.0 + 1e-6, 3.0})));
  CHECK(split.branches().size() == 3);
}

TEST_CASE("tensor_product uses subsystem 1 as the slow index") {
  CHECK(tensor_product(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2))
            .isApprox(ComplexMatrix::Identity(4, 4)));
  CHECK(tensor_product(diag({1, -1}), ComplexMatrix::Identity(2, 2)).isApprox(diag({1, 1, -1, -1})));
  const ComplexMatrix one = diag({0, 1});
  const ComplexMatrix p = tensor_product(one, one);
  CHECK(std::abs(p(3, 3) - 1.0) < 1e-15);
  CHECK(std::abs(p.sum() - 1.0) < 1e-15);
  Rng rng(4);
  const ComplexMatrix a = random_gaussian_matrix(2, 3, rng);
  const ComplexMatrix b = random_gaussian_matrix(3, 2, rng);
  CHECK((tensor_product(a, b) - oracle::kron(a, b)).norm() < 1e-14);
}

TEST_CASE("partial_trace") {
  const BipartiteDims dims{2, 3};
  Rng rng(11);
  const DensityOperator r1 = random_density(2, 2, rng);
  const DensityOperator r2 = random_density(3, 2, rng);
  const ComplexMatrix product = tensor_product(r1.matrix(), r2.matrix());
  CHECK((partial_trace(product, dims, Subsystem::first) - r1.matrix()).norm() < 1e-14);
  CHECK((partial_trace(product, dims, Subsystem::second) - r2.matrix()).norm() < 1e-14);

  const DensityOperator b = DensityOperator::pure(bell(), BipartiteDims{2, 2});
  const ComplexMatrix half = ComplexMatrix::Identity(2, 2) / 2.0;
  CHECK((partial_trace(b, Subsystem::first).matrix() - half).norm() < 1e-15);
  CHECK((partial_trace(b, Subsystem::second).matrix() - half).norm() < 1e-15);

  StateVector ket01 = StateVector::Zero(4);
  ket01(1) = 1.0;
  const DensityOperator s = DensityOperator::pure(ket01, BipartiteDims{2, 2});
  CHECK((partial_trace(s, Subsystem::second).matrix() - diag({0, 1})).norm() < 1e-15);

  const DensityOperator mixed = random_density(6, 4, rng, dims);
  CHECK((partial_trace(mixed, Subsystem::second).matrix() -
         oracle::partial_trace(mixed.matrix(), 2, 3, false))
            .norm() < 1e-14);
  CHECK_THROWS_AS(partial_trace(r1, Subsystem::first), ConfigurationError);
  CHECK_THROWS_AS(partial_trace(product, BipartiteDims{3, 3}, Subsystem::first), DimensionError);
}

TEST_CASE("range_projector") {
  StateVector psi(2);
  psi << 0.6, Complex(0.0, 0.8);
  const DensityOperator pure = DensityOperator::pure(psi);
  CHECK((range_projector(pure).matrix() - pure.matrix()).norm() < 1e-12);
  CHECK((range_projector(DensityOperator(ComplexMatrix::Identity(3, 3) / 3.0)).matrix() -
         ComplexMatrix::Identity(3, 3))
            .norm() < 1e-12);
  CHECK((range_projector(DensityOperator(diag({0.5, 0.5, 0}))).matrix() - diag({1, 1, 0})).norm() <
        1e-12);
}

TEST_CASE("commutator_norm") {
  const ComplexMatrix sx = mat2(0, 1, 1, 0);
  const ComplexMatrix sz = diag({1, -1});
  CHECK(commutator_norm(sz, sz) == doctest::Approx(0.0));
  CHECK(commutator_norm(sz, diag({0.3, 0.7})) == doctest::Approx(0.0));
  CHECK(commutator_norm(sx, sz) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("is_certain_event") {
  Rng rng(3);
  const DensityOperator any = random_density(3, 2, rng);
  const CertaintyReport id = is_certain_event(Projector::identity(3), any);
  CHECK(id.certain);
  CHECK(id.probability == doctest::Approx(1.0));
  CHECK(id.consistent());

  const Projector zero_ket = Projector::onto(StateVector::Unit(2, 0));
  const CertaintyReport same = is_certain_event(zero_ket, DensityOperator(diag({1, 0})));
  CHECK(same.certain);
  CHECK(same.consistent());

  const CertaintyReport half = is_certain_event(zero_ket, DensityOperator(diag({0.5, 0.5})));
  CHECK_FALSE(half.certain);
  CHECK(half.probability == doctest::Approx(0.5));
  CHECK_FALSE(half.algebraic_certain());
  CHECK_FALSE(half.range_certain());
}

TEST_CASE("DensityOperator validation") {
  CHECK_THROWS_AS(DensityOperator(ComplexMatrix::Identity(2, 3)), DimensionError);
  CHECK_THROWS_AS(DensityOperator(mat2(0.5, 0.1, 0.2, 0.5)), InputError);
  CHECK_THROWS_AS(DensityOperator(diag({0.6, 0.6})), InputError);
  CHECK_THROWS_AS(DensityOperator(diag({1.5, -0.5})), InputError);
  CHECK_THROWS_AS(DensityOperator(diag({0.5, 0.5}), BipartiteDims{2, 2}), DimensionError);
  CHECK_THROWS_AS(DensityOperator::pure(StateVector::Ones(2)), InputError);
  ComplexMatrix nan = diag({0.5, 0.5});
  nan(0, 1) = std::nan("");
  CHECK_THROWS_AS(DensityOperator{nan}, InputError);
}

TEST_CASE("SpectralForm validation") {
  const Projector p0 = Projector::onto(StateVector::Unit(2, 0));
  const Projector p1 = Projector::onto(StateVector::Unit(2, 1));
  CHECK_NOTHROW(SpectralForm({{1.0, p0}, {-1.0, p1}}));
  CHECK_THROWS_AS(SpectralForm({{1.0, p0}, {1.0, p1}}), InputError);
  CHECK_THROWS_AS(SpectralForm({{1.0, p0}, {2.0, p0}}), InputError);
  CHECK_THROWS_AS(SpectralForm({{1.0, p0}}), InputError);
  CHECK_NOTHROW(SpectralForm({{1.0, p0}}, HermitianOperator(diag({0, 5}))));
  CHECK_THROWS_AS(SpectralForm({{1.0, p0}}, HermitianOperator(diag({1, 5}))), InputError);
  CHECK_THROWS_AS(Projector(diag({0.5, 1})), InputError);
}

TEST_CASE("spectral_form_from_basis merges equal labels and the complement") {
  const ComplexMatrix cols = ComplexMatrix::Identity(4, 4).leftCols(3);
  const std::vector<double> labels{1.0, 2.0, 1.0};
  const SpectralForm f = spectral_form_from_basis(labels, cols, 2.0);
  REQUIRE(f.branches().size() == 2);
  CHECK((f.operator_matrix() - diag({1, 2, 1, 2})).norm() < 1e-14);
  CHECK_THROWS_AS(spectral_form_from_basis(labels, ComplexMatrix::Ones(4, 3)), InputError);
}

TEST_CASE("embed lifts observables to the composite space") {
  const std::vector<double> labels{1.0, -1.0};
  const SpectralForm z = spectral_form_from_basis(labels, ComplexMatrix::Identity(2, 2));
  const BipartiteDims dims{2, 3};
  const SpectralForm left = embed(z, dims, Subsystem::first);
  const SpectralForm right = embed(spectral_decompose(HermitianOperator(diag({1, 2, 3}))), dims,
                                   Subsystem::second);
  CHECK((left.operator_matrix() - tensor_product(diag({1, -1}), ComplexMatrix::Identity(3, 3)))
            .norm() < 1e-14);
  CHECK((right.operator_matrix() - tensor_product(ComplexMatrix::Identity(2, 2), diag({1, 2, 3})))
            .norm() < 1e-13);
  CHECK(left.branches()[0].projector.rank() == 3);
}

TEST_CASE("property: spectral reconstruction and orthogonality") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = rng.integer(1, 16);
    const std::vector<Index> sizes = random_composition(d, rng.integer(1, d), rng);
    const std::vector<double> values = random_spectrum(sizes.size(), rng);
    Eigen::VectorXd ev(d);
    Index at = 0;
    for (std::size_t j = 0; j < sizes.size(); ++j)
      for (Index t = 0; t < sizes[j]; ++t) ev(at++) = values[j];
    const ComplexMatrix u = random_unitary(d, rng);
    const ComplexMatrix h = u * ev.asDiagonal() * u.adjoint();
    const SpectralForm f = spectral_decompose(HermitianOperator(h));
    CAPTURE(trial);
    CHECK(f.branches().size() == sizes.size());
    CHECK(spectral_norm(f.operator_matrix() - h) <= 1e-10);
    for (std::size_t i = 0; i < f.branches().size(); ++i)
      for (std::size_t j = i + 1; j < f.branches().size(); ++j)
        CHECK(spectral_norm(f.branches()[i].projector.matrix() * f.branches()[j].projector.matrix()) <=
              1e-10);
  }
}

TEST_CASE("property: certainty criteria agree away from the tolerance band") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = rng.integer(2, 8);
    const Index r = rng.integer(1, d - 1);
    const ComplexMatrix v = random_isometry(d, r, rng);
    const Projector p = Projector::from_orthonormal_columns(v);
    const bool inside = rng.integer(0, 1) == 0;
    const DensityOperator sigma = random_density(r, rng.integer(1, r), rng);
    const DensityOperator rho =
        inside ? DensityOperator(v * sigma.matrix() * v.adjoint()) : random_density(d, d, rng);
    const CertaintyReport c = is_certain_event(p, rho);
    CAPTURE(trial);
    CHECK(c.consistent());
    CHECK(c.certain == inside);
  }
}
