#include "twinobs/report.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace twinobs {

using nlohmann::json;

LogBase parse_log_base(const std::string& s) {
  if (s == "nat") return LogBase::nat;
  if (s == "bits") return LogBase::bits;
  throw InputError("unknown log base '" + s + "' (expected nat or bits)");
}

const char* to_string(LogBase b) { return b == LogBase::bits ? "bits" : "nat"; }

namespace {

double in_units(double nats, LogBase base) {
  return base == LogBase::bits ? nats / std::numbers::ln2 : nats;
}

json residual_json(const ResidualNorm& r) {
  return {{"spectral", r.spectral}, {"frobenius", r.frobenius}};
}

json optional_json(const std::optional<double>& v, LogBase base) {
  return v ? json(in_units(*v, base)) : json(nullptr);
}

std::string scalar_text(const json& v) {
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void render(const json& j, int indent, std::ostringstream& os) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      const bool nested = (value.is_object() && !value.empty()) ||
                          (value.is_array() && !value.empty() &&
                           (value.front().is_object() || value.front().is_array()));
      if (nested) {
        os << pad << key << ":\n";
        render(value, indent + 1, os);
      } else if (value.is_array()) {
        os << pad << key << ": [";
        for (std::size_t i = 0; i < value.size(); ++i) {
          os << (i ? ", " : "") << scalar_text(value[i]);
        }
        os << "]\n";
      } else {
        os << pad << key << ": " << scalar_text(value) << '\n';
      }
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      os << pad << "- [" << i << "]\n";
      render(j[i], indent + 1, os);
    }
  } else {
    os << pad << scalar_text(j) << '\n';
  }
}

}  // namespace

json to_json(const EntropyLedger& l, LogBase base) {
  return {{"unit", to_string(base)},
          {"observable_entropy", in_units(l.observable_entropy, base)},
          {"coherence_entropy", in_units(l.coherence_entropy, base)},
          {"state_entropy", in_units(l.state_entropy, base)},
          {"luders_entropy", in_units(l.luders_entropy, base)},
          {"average_component_entropy", in_units(l.avg_component_entropy, base)},
          {"entropy_decrease", in_units(l.residual, base)},
          {"probabilities", l.probabilities},
          {"balance_residual", in_units(l.balance_residual(), base)},
          {"sandwich_violation", in_units(l.sandwich_violation(), base)},
          {"consistent", l.consistent()}};
}

json to_json(const WeakStrongDecomposition& d) {
  json weak = json::array();
  for (const auto& w : d.weak_branches) {
    weak.push_back({{"eigenvalue", w.eigenvalue},
                    {"probability", w.probability},
                    {"commutator", w.commutator}});
  }
  json strong = json::array();
  for (const auto& s : d.strong_branches) {
    strong.push_back({{"eigenvalue", s.eigenvalue},
                      {"probability", s.probability},
                      {"commutator", s.commutator}});
  }
  json undetectable = json::array();
  for (const auto& u : d.undetectable) undetectable.push_back(u.eigenvalue);
  return {{"regime", to_string(d.regime)},
          {"weak_probability", d.weak_probability},
          {"commutation_tolerance", d.comm_tol},
          {"weak_branches", weak},
          {"strong_branches", strong},
          {"undetectable_eigenvalues", undetectable}};
}

json to_json(const CompletenessReport& c) {
  json j = {{"complete", c.complete},
            {"second_eigenvalues", c.second_eigenvalues},
            {"commutator", c.commutator}};
  j["range_rank_criterion"] = c.range_rank_criterion ? json(*c.range_rank_criterion) : json(nullptr);
  return j;
}

json to_json(const PtoReport& r) {
  json pairs = json::array();
  for (const auto& m : r.bijection) {
    pairs.push_back({{"eigenvalue_1", m.eigenvalue1},
                     {"eigenvalue_2", m.eigenvalue2},
                     {"probability", m.probability},
                     {"algebraic_residual", residual_json(m.algebraic_residual)},
                     {"measurement_residual", residual_json(m.measurement_residual)},
                     {"runner_up", std::isfinite(m.runner_up) ? json(m.runner_up) : json(nullptr)}});
  }
  return {{"is_pto", r.is_pto},
          {"is_algebraic_twin", r.is_algebraic_twin},
          {"tolerance", r.tolerance},
          {"total_probability", {r.total_probability_1, r.total_probability_2}},
          {"bijection", pairs},
          {"derived_compatibility",
           {r.derived_compatibility[0], r.derived_compatibility[1]}},
          {"algebraic_twin_residual", r.algebraic_twin_residual},
          {"diagnostics", r.diagnostics}};
}

json to_json(const DiscordLedger& l, LogBase base) {
  json sides = json::array();
  for (const auto& s : l.sides) {
    sides.push_back({{"observable_entropy", in_units(s.observable_entropy, base)},
                     {"coherence_entropy", in_units(s.coherence_entropy, base)},
                     {"residual_info", in_units(s.residual_info, base)},
                     {"luders_info", in_units(s.luders_info, base)},
                     {"subsystem_commutator", s.subsystem_commutator},
                     {"complete", s.complete}});
  }
  return {{"unit", to_string(base)},
          {"status", to_string(l.status)},
          {"mutual_information", in_units(l.mutual_information, base)},
          {"quasi_classical_information", optional_json(l.i_qcl, base)},
          {"discord", optional_json(l.discord, base)},
          {"sides", sides},
          {"pto", to_json(l.pto)},
          {"violations", l.violations}};
}

json to_json(const TheoremReport& r) {
  json records = json::array();
  for (const auto& rec : r.records) {
    records.push_back({{"name", rec.name},
                       {"statement", rec.statement},
                       {"instances_run", rec.instances_run},
                       {"max_residual", rec.max_residual},
                       {"tolerance", rec.tolerance},
                       {"pass", rec.pass},
                       {"failures", rec.failures}});
  }
  return {{"seed", r.seed},
          {"trials", r.trials},
          {"max_dim", r.max_dim},
          {"wall_time_seconds", r.wall_time_seconds},
          {"all_pass", r.all_pass()},
          {"records", records}};
}

std::string render_text(const json& j) {
  std::ostringstream os;
  render(j, 0, os);
  return os.str();
}

}  // namespace twinobs
