#include "twinobs/state_file.hpp"

#include <fstream>
#include <sstream>

namespace twinobs {

using nlohmann::json;

const char* to_string(StateKind k) {
  switch (k) {
    case StateKind::density: return "density";
    case StateKind::pure: return "pure";
    case StateKind::observable: return "observable";
  }
  return "unknown";
}

Index StateFile::dim() const {
  Index d = 1;
  for (Index x : dims) d *= x;
  return d;
}

std::optional<BipartiteDims> StateFile::bipartite() const {
  if (dims.size() == 2) return BipartiteDims{dims[0], dims[1]};
  return std::nullopt;
}

StateFile StateFile::from_density(const DensityOperator& rho) {
  StateFile f;
  f.kind = StateKind::density;
  if (rho.bipartite_dims()) {
    f.dims = {rho.bipartite_dims()->first, rho.bipartite_dims()->second};
  } else {
    f.dims = {rho.dim()};
  }
  f.data = rho.matrix();
  return f;
}

StateFile StateFile::from_pure(const StateVector& phi, std::vector<Index> dims) {
  StateFile f;
  f.kind = StateKind::pure;
  f.dims = std::move(dims);
  f.data = phi;
  return f;
}

StateFile StateFile::from_observable(const ComplexMatrix& a) {
  StateFile f;
  f.kind = StateKind::observable;
  f.dims = {a.rows()};
  f.data = a;
  return f;
}

namespace {

Complex parse_complex(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InputError("state file: complex entries must be [re, im] number pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

StateKind parse_kind(const std::string& s) {
  if (s == "density") return StateKind::density;
  if (s == "pure") return StateKind::pure;
  if (s == "observable") return StateKind::observable;
  throw InputError("state file: unknown kind '" + s + "'");
}

}  // namespace

StateFile parse_state_file(const json& j) {
  if (!j.is_object()) throw InputError("state file: top level must be an object");
  for (const char* key : {"kind", "dims", "data"}) {
    if (!j.contains(key)) throw InputError(std::string("state file: missing '") + key + "'");
  }
  StateFile f;
  if (!j["kind"].is_string()) throw InputError("state file: 'kind' must be a string");
  f.kind = parse_kind(j["kind"].get<std::string>());

  const json& dims = j["dims"];
  if (!dims.is_array() || dims.empty() || dims.size() > 2) {
    throw InputError("state file: 'dims' must list one or two dimensions");
  }
  for (const auto& d : dims) {
    if (!d.is_number_integer() || d.get<long long>() < 1) {
      throw InputError("state file: dimensions must be positive integers");
    }
    f.dims.push_back(static_cast<Index>(d.get<long long>()));
  }
  if (f.kind == StateKind::observable && f.dims.size() != 1) {
    throw InputError("state file: observables take a single dimension");
  }
  const Index n = f.dim();

  const json& data = j["data"];
  if (!data.is_array()) throw InputError("state file: 'data' must be an array");
  if (f.kind == StateKind::pure) {
    if (static_cast<Index>(data.size()) != n) {
      std::ostringstream os;
      os << "state file: pure state has " << data.size() << " entries, dims give " << n;
      throw DimensionError(os.str());
    }
    f.data.resize(n, 1);
    for (Index i = 0; i < n; ++i) f.data(i, 0) = parse_complex(data[static_cast<std::size_t>(i)]);
  } else {
    if (static_cast<Index>(data.size()) != n) {
      std::ostringstream os;
      os << "state file: matrix has " << data.size() << " rows, dims give " << n;
      throw DimensionError(os.str());
    }
    f.data.resize(n, n);
    for (Index r = 0; r < n; ++r) {
      const json& row = data[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Index>(row.size()) != n) {
        throw InputError("state file: matrix rows must have one entry per column");
      }
      for (Index c = 0; c < n; ++c) f.data(r, c) = parse_complex(row[static_cast<std::size_t>(c)]);
    }
    if (!hermitian_check(f.data, 1e-10)) {
      throw InputError(std::string("state file: ") + to_string(f.kind) + " matrix is not Hermitian");
    }
  }
  if (j.contains("meta")) {
    if (!j["meta"].is_object()) throw InputError("state file: 'meta' must be an object");
    f.meta = j["meta"];
  }
  return f;
}

json to_json(const StateFile& f) {
  json j;
  j["kind"] = to_string(f.kind);
  j["dims"] = f.dims;
  json data = json::array();
  if (f.kind == StateKind::pure) {
    for (Index i = 0; i < f.data.rows(); ++i) data.push_back(complex_json(f.data(i, 0)));
  } else {
    for (Index r = 0; r < f.data.rows(); ++r) {
      json row = json::array();
      for (Index c = 0; c < f.data.cols(); ++c) row.push_back(complex_json(f.data(r, c)));
      data.push_back(std::move(row));
    }
  }
  j["data"] = std::move(data);
  if (!f.meta.empty()) j["meta"] = f.meta;
  return j;
}

StateFile load_state_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return parse_state_file(j);
}

void save_state_file(const std::filesystem::path& path, const StateFile& f) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_json(f).dump(2) << '\n';
}

DensityOperator to_density(const StateFile& f, const Tolerances& tol) {
  switch (f.kind) {
    case StateKind::density: return DensityOperator(f.data, f.bipartite(), tol);
    case StateKind::pure: return DensityOperator::pure(f.data.col(0), f.bipartite());
    case StateKind::observable: break;
  }
  throw InputError("expected a density or pure state file, got an observable");
}

StateVector to_pure(const StateFile& f) {
  if (f.kind != StateKind::pure) {
    throw InputError(std::string("expected a pure state file, got ") + to_string(f.kind));
  }
  return f.data.col(0);
}

SpectralForm to_observable(const StateFile& f, const Tolerances& tol) {
  if (f.kind != StateKind::observable) {
    throw InputError(std::string("expected an observable file, got ") + to_string(f.kind));
  }
  return spectral_decompose(HermitianOperator(f.data, tol.hermiticity), tol.cluster);
}

}  // namespace twinobs
