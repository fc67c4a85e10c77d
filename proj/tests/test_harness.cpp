#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "twinobs/entropy.hpp"
#include "twinobs/random.hpp"
#include "twinobs/report.hpp"
#include "twinobs/selftest.hpp"
#include "twinobs/state_file.hpp"
#include "twinobs/twins.hpp"

using namespace twinobs;
using nlohmann::json;

TEST_CASE("Rng is reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.bits() == b.bits());
    CHECK(a.normal() == b.normal());
  }
  Rng d(7), e(7);
  CHECK(random_density(5, 3, d).matrix() == random_density(5, 3, e).matrix());
  CHECK(random_density(5, 3, 11).matrix() == random_density(5, 3, 11).matrix());
}

TEST_CASE("Rng ranges") {
  Rng rng(3);
  double lo = 1.0, hi = 0.0, mean = 0.0;
  std::set<Index> seen;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    mean += u;
    seen.insert(rng.integer(-2, 3));
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(mean / 20000 == doctest::Approx(0.5).epsilon(0.02));
  CHECK(seen == std::set<Index>{-2, -1, 0, 1, 2, 3});
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t t = 0; t < 100; ++t)
    for (std::uint64_t s = 0; s < 10; ++s) seeds.insert(derive_seed(1, t, s));
  CHECK(seeds.size() == 1000);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("random generators") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = rng.integer(1, 8);
    const Index r = rng.integer(1, d);
    const DensityOperator rho = random_density(d, r, rng);
    CAPTURE(trial);
    CHECK(std::abs(rho.matrix().trace().real() - 1.0) < 1e-12);
    Index rank = 0;
    for (Index i = 0; i < d; ++i) rank += rho.eigenvalues()(i) > 1e-10;
    CHECK(rank == r);

    const ComplexMatrix u = random_unitary(d, rng);
    CHECK((u.adjoint() * u - ComplexMatrix::Identity(d, d)).norm() < 1e-12);

    const std::vector<double> p = random_distribution(static_cast<std::size_t>(d), rng);
    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= 0.1 / static_cast<double>(d) - 1e-15);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0));

    const std::vector<Index> parts = random_composition(d, r, rng);
    CHECK(static_cast<Index>(parts.size()) == r);
    Index total = 0;
    for (Index k : parts) {
      CHECK(k >= 1);
      total += k;
    }
    CHECK(total == d);
  }
  CHECK_THROWS_AS(random_density(3, 0, rng), DomainError);
  CHECK_THROWS_AS(random_density(3, 4, rng), DomainError);
  CHECK_THROWS_AS(random_pure_bipartite(2, 3, rng, 3), DomainError);
}

TEST_CASE("random_pure_bipartite Schmidt rank") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d1 = rng.integer(2, 5), d2 = rng.integer(2, 5);
    const Index r = rng.integer(1, std::min(d1, d2));
    const StateVector phi = random_pure_bipartite(d1, d2, rng, r);
    CHECK(std::abs(phi.norm() - 1.0) < 1e-12);
    CHECK(static_cast<Index>(schmidt_decompose(phi, {d1, d2}).coefficients.size()) == r);
    const double info = mutual_information(DensityOperator::pure(phi, BipartiteDims{d1, d2}));
    if (r == 1) CHECK(std::abs(info) < 1e-10);
    CHECK(info <= 2.0 * std::log(static_cast<double>(r)) + 1e-10);
  }
}

TEST_CASE("StateFile round trip is bit exact") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d1 = rng.integer(1, 4), d2 = rng.integer(1, 4);
    const std::vector<StateFile> files{
        StateFile::from_density(random_density(d1 * d2, rng.integer(1, d1 * d2), rng, BipartiteDims{d1, d2})),
        StateFile::from_pure(random_pure_bipartite(d1, d2, rng), {d1, d2}),
        StateFile::from_observable(random_observable({d1, d2}, rng).operator_matrix())};
    for (const StateFile& f : files) {
      const StateFile back = parse_state_file(json::parse(to_json(f).dump()));
      CHECK(back.kind == f.kind);
      CHECK(back.dims == f.dims);
      CHECK(back.data == f.data);
    }
  }
}

TEST_CASE("StateFile disk round trip and conversions") {
  StateVector phi = StateVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  const auto path = std::filesystem::temp_directory_path() / "twinobs_test_state.json";
  save_state_file(path, StateFile::from_pure(phi, {2, 2}));
  const StateFile f = load_state_file(path);
  std::filesystem::remove(path);
  CHECK(f.kind == StateKind::pure);
  CHECK(f.bipartite() == BipartiteDims{2, 2});
  CHECK((to_pure(f) - phi).norm() == 0.0);
  CHECK(std::abs(von_neumann_entropy(to_density(f))) < 1e-12);
  CHECK_THROWS_AS(load_state_file("/nonexistent/twinobs.json"), InputError);
}

TEST_CASE("parse_state_file rejects bad input") {
  const auto row = [](std::initializer_list<double> v) {
    json r = json::array();
    for (double x : v) r.push_back(json::array({x, 0.0}));
    return r;
  };
  json good{{"kind", "density"}, {"dims", {2}}, {"data", {row({0.5, 0}), row({0, 0.5})}}};
  CHECK_NOTHROW(parse_state_file(good));

  json bad_kind = good;
  bad_kind["kind"] = "mixed";
  CHECK_THROWS_AS(parse_state_file(bad_kind), InputError);

  json bad_dims = good;
  bad_dims["dims"] = {3};
  CHECK_THROWS_AS(parse_state_file(bad_dims), DimensionError);

  json ragged = good;
  ragged["data"] = {row({0.5, 0}), row({0.5})};
  CHECK_THROWS_AS(parse_state_file(ragged), InputError);

  json non_hermitian = good;
  non_hermitian["data"] = {row({0.5, 1}), row({0, 0.5})};
  CHECK_THROWS_AS(parse_state_file(non_hermitian), InputError);

  json bad_entry = good;
  bad_entry["data"][0][0] = "x";
  CHECK_THROWS_AS(parse_state_file(bad_entry), InputError);

  json bad_meta = good;
  bad_meta["meta"] = 3;
  CHECK_THROWS_AS(parse_state_file(bad_meta), InputError);

  CHECK_THROWS_AS(parse_state_file(json::array()), InputError);

  json unnormalized{{"kind", "pure"}, {"dims", {2}}, {"data", {{1.0, 0.0}, {1.0, 0.0}}}};
  CHECK_THROWS_AS(to_density(parse_state_file(unnormalized)), InputError);
}

TEST_CASE("selftest is deterministic and thread independent") {
  SelftestConfig cfg;
  cfg.seed = 99;
  cfg.trials = 6;
  cfg.max_dim = 5;
  cfg.threads = 1;
  const TheoremReport a = run_selftest(cfg);
  const TheoremReport b = run_selftest(cfg);
  cfg.threads = 3;
  const TheoremReport c = run_selftest(cfg);
  CHECK(a.all_pass());
  REQUIRE(a.records.size() == b.records.size());
  REQUIRE(a.records.size() == c.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CAPTURE(a.records[i].name);
    CHECK(a.records[i].instances_run > 0);
    CHECK(a.records[i].max_residual == b.records[i].max_residual);
    CHECK(a.records[i].max_residual == c.records[i].max_residual);
    CHECK(a.records[i].instances_run == c.records[i].instances_run);
  }
  CHECK(a.record("bell_state_golden").instances_run == 1);
  CHECK_THROWS_AS(a.record("no_such_check"), std::out_of_range);

  SelftestConfig bad;
  bad.trials = 0;
  CHECK_THROWS_AS(run_selftest(bad), InputError);
  bad.trials = 1;
  bad.max_dim = 9;
  CHECK_THROWS_AS(run_selftest(bad), InputError);
}

TEST_CASE("report serialization") {
  StateVector phi = StateVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  const DensityOperator rho = DensityOperator::pure(phi, BipartiteDims{2, 2});
  const TwinPair t = construct_pto_pure(phi, {2, 2});
  const DiscordLedger l = discord_decomposition(rho, t.first, t.second);

  const json nat = to_json(l);
  const json bits = to_json(l, LogBase::bits);
  CHECK(nat["status"] == "available");
  CHECK(nat["mutual_information"].get<double>() == doctest::Approx(2 * std::log(2.0)));
  CHECK(bits["mutual_information"].get<double>() == doctest::Approx(2.0));
  CHECK(nat.contains("pto"));

  const json pto = to_json(l.pto);
  CHECK(pto["is_pto"] == true);
  CHECK(pto["bijection"].size() == 2);

  const json ledger = to_json(entropy_balance(embed(t.first, {2, 2}, Subsystem::first), rho));
  CHECK(ledger.contains("coherence_entropy"));
  CHECK(ledger.contains("observable_entropy"));

  SelftestConfig cfg;
  cfg.trials = 1;
  cfg.max_dim = 3;
  cfg.threads = 1;
  const json rep = to_json(run_selftest(cfg));
  for (const char* key : {"seed", "trials", "max_dim", "wall_time_seconds", "all_pass", "records"})
    CHECK(rep.contains(key));
  CHECK(rep["records"][0].contains("max_residual"));

  const std::string text = render_text(json{{"a", 1.5}, {"b", {{"c", "x"}}}});
  CHECK(text.find("a: 1.5") != std::string::npos);
  CHECK(text.find("  c: x") != std::string::npos);

  CHECK(parse_log_base("bits") == LogBase::bits);
  CHECK_THROWS_AS(parse_log_base("decibans"), InputError);
}
