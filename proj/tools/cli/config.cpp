#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kglab/format.hpp"

namespace kglab::cli {

using nlohmann::json;

std::vector<std::int64_t> parse_residues(std::string_view text, int d) {
  if (trim(text).empty()) return std::vector<std::int64_t>(d, 0);
  std::vector<std::int64_t> out;
  for (const auto& token : split(text, ',')) {
    try {
      out.push_back(parse_integer(trim(token)));
    } catch (const std::exception&) {
      throw UsageError("bad residue '" + token + "'");
    }
  }
  if (static_cast<int>(out.size()) != d) {
    throw UsageError("residue list has " + std::to_string(out.size()) +
                     " entries, expected d = " + std::to_string(d));
  }
  return out;
}

ProblemInstance make_instance(const InstanceFlags& flags, std::ostream* note) {
  if (flags.m < 1 || flags.n < 1) throw UsageError("m and n must be >= 1");
  if (flags.modulus < 1) throw UsageError("mod must be >= 1");
  try {
    const NormSpec nu1 = NormSpec::parse(flags.norm1, flags.m);
    const NormSpec given = NormSpec::parse(flags.norm2, flags.n);
    const NormSpec nu2 = normalize_for_integers(given);
    if (note && !(nu2 == given)) {
      *note << "note: norm2 rescaled to " << nu2.to_string()
            << " so its minimum on nonzero integer vectors is 1\n";
    }
    return ProblemInstance(flags.m, flags.n, nu1, nu2, ApproxFunction::parse(flags.psi),
                           CongruenceClass(parse_residues(flags.residues, flags.m + flags.n),
                                           flags.modulus));
  } catch (const UsageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
}

namespace {

void check_keys(const json& object, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!object.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.count(key)) throw UsageError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& object, const std::string& key, const std::string& where) {
  if (!object.contains(key)) throw UsageError("missing key '" + key + "' in " + where);
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("key '" + key + "' in " + where + " has the wrong type");
  }
}

template <typename T>
T get_or(const json& object, const std::string& key, T fallback, const std::string& where) {
  return object.contains(key) ? get<T>(object, key, where) : fallback;
}

ThetaMatrix theta_from_json(const json& value, int m, int n) {
  ThetaMatrix theta(m, n);
  std::vector<double> flat;
  if (!value.is_array()) throw UsageError("theta value must be an array");
  for (const auto& row : value) {
    if (row.is_array()) {
      for (const auto& x : row) {
        if (!x.is_number()) throw UsageError("theta entries must be numbers");
        flat.push_back(x.get<double>());
      }
    } else if (row.is_number()) {
      flat.push_back(row.get<double>());
    } else {
      throw UsageError("theta entries must be numbers");
    }
  }
  if (static_cast<int>(flat.size()) != m * n) {
    throw UsageError("theta value needs m*n = " + std::to_string(m * n) + " entries");
  }
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) theta(r, c) = flat[r * n + c];
  return theta;
}

}  // namespace

ExperimentFile parse_experiment_config(std::string_view text, std::ostream* note) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  const std::string top = "config";
  check_keys(doc, {"m", "n", "norm1", "norm2", "psi", "mod", "res", "theta", "grid", "seed"},
             top);
  InstanceFlags flags;
  flags.m = get<int>(doc, "m", top);
  flags.n = get<int>(doc, "n", top);
  flags.norm1 = get_or<std::string>(doc, "norm1", "sup", top);
  flags.norm2 = get_or<std::string>(doc, "norm2", "sup", top);
  flags.psi = get<std::string>(doc, "psi", top);
  flags.modulus = get_or<std::int64_t>(doc, "mod", 1, top);
  if (doc.contains("res")) {
    const auto res = get<std::vector<std::int64_t>>(doc, "res", top);
    std::string joined;
    for (std::size_t i = 0; i < res.size(); ++i) {
      joined += (i ? "," : "") + std::to_string(res[i]);
    }
    if (res.empty()) throw UsageError("res must not be empty");
    flags.residues = joined;
  }
  ProblemInstance instance = make_instance(flags, note);

  ThetaSource thetas;
  const json& theta = doc.contains("theta") ? doc.at("theta") : json::object();
  check_keys(theta, {"kind", "count", "values"}, "theta");
  const std::string kind = get_or<std::string>(theta, "kind", "uniform", "theta");
  if (kind == "uniform") {
    if (theta.contains("values")) throw UsageError("theta kind 'uniform' takes no values");
    const auto count = get_or<long long>(theta, "count", 20, "theta");
    if (count < 1) throw UsageError("theta count must be >= 1");
    thetas.count = static_cast<std::size_t>(count);
  } else if (kind == "list") {
    if (theta.contains("count")) throw UsageError("theta kind 'list' takes no count");
    const json& values = theta.contains("values") ? theta.at("values") : json();
    if (!values.is_array() || values.empty()) throw UsageError("theta values must be a non-empty array");
    thetas.kind = ThetaSource::Kind::list;
    for (const auto& v : values) thetas.values.push_back(theta_from_json(v, flags.m, flags.n));
    thetas.count = thetas.values.size();
  } else {
    throw UsageError("theta kind must be 'uniform' or 'list'");
  }

  if (!doc.contains("grid")) throw UsageError("missing key 'grid' in config");
  const json& grid = doc.at("grid");
  check_keys(grid, {"tmin", "tmax", "points"}, "grid");
  GridSpec spec;
  spec.tmin = get<double>(grid, "tmin", "grid");
  spec.tmax = get<double>(grid, "tmax", "grid");
  const auto points = get<long long>(grid, "points", "grid");
  if (points < 1) throw UsageError("grid points must be >= 1");
  spec.points = static_cast<std::size_t>(points);
  try {
    geometric_grid(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto seed = get_or<std::uint64_t>(doc, "seed", 1, top);
  return {RunConfig{std::move(instance), std::move(thetas), spec, seed, 1}, doc.dump()};
}

ExperimentFile load_experiment_config(const std::string& path, std::ostream* note) {
  return parse_experiment_config(read_file(path), note);
}

SeedChoice resolve_seed(std::uint64_t seed) {
  const char* env = std::getenv("KGLAB_SEED");
  if (env == nullptr || *env == '\0') return {seed, false};
  try {
    const long long v = parse_integer(trim(env));
    if (v < 0) throw std::invalid_argument("negative");
    return {static_cast<std::uint64_t>(v), true};
  } catch (const std::exception&) {
    throw UsageError(std::string("KGLAB_SEED is not a non-negative integer: ") + env);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace kglab::cli
