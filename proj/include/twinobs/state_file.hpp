#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twinobs/operator_core.hpp"

namespace twinobs {

enum class StateKind { density, pure, observable };

const char* to_string(StateKind k);

/// On-disk form of a state or observable:
///
///   {"kind": "density", "dims": [2, 2],
///    "data": [[[re, im], ...], ...], "meta": {...}}
///
/// `data` is a list of rows for density and observable files and a flat
/// list of entries for pure states. Complex numbers are [re, im] pairs.
struct StateFile {
  StateKind kind = StateKind::density;
  std::vector<Index> dims;
  ComplexMatrix data;  // n x 1 for pure states
  nlohmann::json meta = nlohmann::json::object();

  Index dim() const;
  std::optional<BipartiteDims> bipartite() const;

  static StateFile from_density(const DensityOperator& rho);
  static StateFile from_pure(const StateVector& phi, std::vector<Index> dims);
  static StateFile from_observable(const ComplexMatrix& a);
};

/// InputError on malformed JSON or shape mismatch; DimensionError if the
/// dims do not multiply to the data size.
StateFile parse_state_file(const nlohmann::json& j);
nlohmann::json to_json(const StateFile& f);

StateFile load_state_file(const std::filesystem::path& path);
void save_state_file(const std::filesystem::path& path, const StateFile& f);

/// Density operator from a density or pure file, validated.
DensityOperator to_density(const StateFile& f, const Tolerances& tol = {});
/// Unit vector from a pure file.
StateVector to_pure(const StateFile& f);
/// Spectral form of an observable file.
SpectralForm to_observable(const StateFile& f, const Tolerances& tol = {});

}  // namespace twinobs
