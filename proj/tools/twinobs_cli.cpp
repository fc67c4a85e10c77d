// Command-line front end: analysis of state/observable files, twin
// verification and construction, the discord ledger and the self-test.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "twinobs/entropy.hpp"
#include "twinobs/relation.hpp"
#include "twinobs/report.hpp"
#include "twinobs/selftest.hpp"
#include "twinobs/state_file.hpp"
#include "twinobs/twins.hpp"

namespace {

using namespace twinobs;
using nlohmann::json;

enum ExitCode { kOk = 0, kFailed = 1, kBadInput = 2, kPrecondition = 3 };

struct GlobalOptions {
  double tol = 1e-8;
  std::string format = "text";
  std::string log_base = "nat";
};

void emit(const json& j, const GlobalOptions& g) {
  if (g.format == "json") {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << render_text(j);
  }
}

Tolerances tolerances_for(const GlobalOptions& g) {
  Tolerances t;
  t.certainty = g.tol;
  return t;
}

/// Observable file checked against the dimension it must act on.
SpectralForm load_observable(const std::string& path, Index expected, const char* role,
                             const Tolerances& tols) {
  const SpectralForm a = to_observable(load_state_file(path), tols);
  if (a.dim() != expected) {
    throw DimensionError(std::string(role) + " acts on dimension " + std::to_string(a.dim()) +
                         ", expected " + std::to_string(expected));
  }
  return a;
}

DensityOperator load_bipartite_state(const std::string& path, const Tolerances& tols) {
  DensityOperator rho = to_density(load_state_file(path), tols);
  if (!rho.bipartite_dims()) {
    throw ConfigurationError(path + ": a two-party state needs \"dims\": [d1, d2]");
  }
  return rho;
}

int run_analyze(const std::string& state_path, const std::string& observable_path,
                const GlobalOptions& g) {
  const Tolerances tols = tolerances_for(g);
  const LogBase base = parse_log_base(g.log_base);
  const DensityOperator rho = to_density(load_state_file(state_path), tols);
  const SpectralForm a = load_observable(observable_path, rho.dim(), "observable", tols);
  json out;
  out["entropy"] = to_json(entropy_balance(a, rho, tols), base);
  out["weak_strong"] = to_json(weak_strong_decompose(a, rho, std::nullopt, tols));
  out["completeness"] = to_json(completeness(a, rho, tols));
  emit(out, g);
  return kOk;
}

int run_pto_verify(const std::string& state_path, const std::string& a1_path,
                   const std::string& a2_path, const GlobalOptions& g) {
  const Tolerances tols = tolerances_for(g);
  const DensityOperator rho = load_bipartite_state(state_path, tols);
  const BipartiteDims dims = *rho.bipartite_dims();
  const SpectralForm a1 = load_observable(a1_path, dims.first, "A1", tols);
  const SpectralForm a2 = load_observable(a2_path, dims.second, "A2", tols);
  const PtoReport report = verify_pto(a1, a2, rho, g.tol, tols);
  emit(to_json(report), g);
  return report.is_pto ? kOk : kFailed;
}

int run_pto_construct(const std::string& state_path, const std::string& out_a1,
                      const std::string& out_a2, const GlobalOptions& g) {
  const Tolerances tols = tolerances_for(g);
  const StateFile file = load_state_file(state_path);
  if (!file.bipartite()) {
    throw ConfigurationError(state_path + ": a two-party state needs \"dims\": [d1, d2]");
  }
  const BipartiteDims dims = *file.bipartite();
  StateVector phi;
  if (file.kind == StateKind::pure) {
    phi = to_pure(file);
  } else {
    const DensityOperator rho = to_density(file, tols);
    const Eigen::VectorXd& ev = rho.eigenvalues();
    if (ev(ev.size() - 1) < 1.0 - g.tol) {
      throw PreconditionError("twin construction needs a pure state", 1.0 - ev(ev.size() - 1));
    }
    phi = rho.eigenvectors().col(rho.dim() - 1);
  }
  const SchmidtForm schmidt = schmidt_decompose(phi, dims);
  const TwinPair twins = construct_pto_pure(phi, dims);
  const DensityOperator rho = DensityOperator::pure(phi, dims);

  json out;
  out["schmidt_coefficients"] = schmidt.coefficients;
  out["verification"] = to_json(verify_pto(twins.first, twins.second, rho, g.tol, tols));
  if (!out_a1.empty()) {
    save_state_file(out_a1, StateFile::from_observable(twins.first.operator_matrix()));
    out["a1_file"] = out_a1;
  }
  if (!out_a2.empty()) {
    save_state_file(out_a2, StateFile::from_observable(twins.second.operator_matrix()));
    out["a2_file"] = out_a2;
  }
  emit(out, g);
  return kOk;
}

int run_discord(const std::string& state_path, const std::string& a1_path,
                const std::string& a2_path, const GlobalOptions& g) {
  const Tolerances tols = tolerances_for(g);
  const DensityOperator rho = load_bipartite_state(state_path, tols);
  const BipartiteDims dims = *rho.bipartite_dims();
  const SpectralForm a1 = load_observable(a1_path, dims.first, "A1", tols);
  const SpectralForm a2 = load_observable(a2_path, dims.second, "A2", tols);
  const DiscordLedger ledger = discord_decomposition(rho, a1, a2, g.tol, tols);
  emit(to_json(ledger, parse_log_base(g.log_base)), g);
  return ledger.violations.empty() ? kOk : kFailed;
}

std::uint64_t seed_from_environment(std::uint64_t fallback) {
  const char* env = std::getenv("TWINOBS_SEED");
  if (!env || !*env) return fallback;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InputError(std::string("TWINOBS_SEED is not an unsigned integer: ") + env);
  }
}

int run_selftest_command(SelftestConfig config, const GlobalOptions& g) {
  config.seed = seed_from_environment(config.seed);
  config.tolerance = g.tol;
  const TheoremReport report = run_selftest(config);
  if (g.format == "json") {
    std::cout << to_json(report).dump(2) << '\n';
  } else {
    std::printf("seed %llu, %d trials, max dim %lld, %.2f s\n",
                static_cast<unsigned long long>(report.seed), report.trials,
                static_cast<long long>(report.max_dim), report.wall_time_seconds);
    for (const auto& r : report.records) {
      std::printf("%-4s %-34s %6zu instances  max residual %.3e  (tol %.0e)\n",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.instances_run, r.max_residual,
                  r.tolerance);
      for (const auto& f : r.failures) std::printf("       %s\n", f.c_str());
    }
    std::printf("%s\n", report.all_pass() ? "all checks passed" : "SOME CHECKS FAILED");
  }
  return report.all_pass() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherence entropy, physical twin observables and discord"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--tol", g.tol, "Residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--log-base", g.log_base, "Entropy display unit")
      ->check(CLI::IsMember({"nat", "bits"}));

  std::string state, observable, a1, a2, out_a1, out_a2;

  auto* analyze = app.add_subcommand("analyze", "Entropy ledger, weak/strong split, completeness");
  analyze->add_option("--state", state, "State file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--observable", observable, "Observable file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* pto = app.add_subcommand("pto", "Physical twin observables");
  pto->require_subcommand(1);
  auto* verify = pto->add_subcommand("verify", "Check whether A1, A2 are twins in a state");
  verify->add_option("--state", state, "Two-party state file")->required()->check(CLI::ExistingFile);
  verify->add_option("--a1", a1, "Subsystem 1 observable")->required()->check(CLI::ExistingFile);
  verify->add_option("--a2", a2, "Subsystem 2 observable")->required()->check(CLI::ExistingFile);
  auto* construct = pto->add_subcommand("construct", "Schmidt twins of a pure state");
  construct->add_option("--state", state, "Pure two-party state file")
      ->required()
      ->check(CLI::ExistingFile);
  construct->add_option("--out-a1", out_a1, "Write A1 here");
  construct->add_option("--out-a2", out_a2, "Write A2 here");

  auto* discord = app.add_subcommand("discord", "Mutual information split through twins");
  discord->add_option("--state", state, "Two-party state file")->required()->check(CLI::ExistingFile);
  discord->add_option("--a1", a1, "Subsystem 1 observable")->required()->check(CLI::ExistingFile);
  discord->add_option("--a2", a2, "Subsystem 2 observable")->required()->check(CLI::ExistingFile);

  SelftestConfig config;
  auto* selftest = app.add_subcommand("selftest", "Verify every identity on random instances");
  selftest->add_option("--seed", config.seed, "Global seed (TWINOBS_SEED overrides)");
  selftest->add_option("--trials", config.trials, "Number of random trials")
      ->check(CLI::PositiveNumber);
  selftest->add_option("--max-dim", config.max_dim, "Largest local dimension")
      ->check(CLI::Range(3, 8));
  selftest->add_option("--threads", config.threads, "Worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return run_analyze(state, observable, g);
    if (*verify) return run_pto_verify(state, a1, a2, g);
    if (*construct) return run_pto_construct(state, out_a1, out_a2, g);
    if (*discord) return run_discord(state, a1, a2, g);
    if (*selftest) return run_selftest_command(config, g);
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << " (deficit " << e.deficit() << ")\n";
    return kPrecondition;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}
