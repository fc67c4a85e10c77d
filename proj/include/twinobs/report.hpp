#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "twinobs/entropy.hpp"
#include "twinobs/relation.hpp"
#include "twinobs/selftest.hpp"
#include "twinobs/twins.hpp"

namespace twinobs {

/// Display unit for entropies and informations. Computation is always in nats.
enum class LogBase { nat, bits };

LogBase parse_log_base(const std::string& s);
const char* to_string(LogBase b);

nlohmann::json to_json(const EntropyLedger& l, LogBase base = LogBase::nat);
nlohmann::json to_json(const WeakStrongDecomposition& d);
nlohmann::json to_json(const CompletenessReport& c);
nlohmann::json to_json(const PtoReport& r);
nlohmann::json to_json(const DiscordLedger& l, LogBase base = LogBase::nat);
nlohmann::json to_json(const TheoremReport& r);

/// Indented "key: value" rendering of a JSON document for terminals.
std::string render_text(const nlohmann::json& j);

}  // namespace twinobs
