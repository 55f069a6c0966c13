#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kglab/counting.hpp"
#include "kglab/experiments.hpp"

namespace kglab::cli {

// Bad flags, config or input; maps to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct InstanceFlags {
  int m = 0;
  int n = 0;
  std::string norm1 = "sup";
  std::string norm2 = "sup";
  std::string psi;
  std::int64_t modulus = 1;
  std::string residues;  // comma list of length m + n; empty means zeros
};

std::vector<std::int64_t> parse_residues(std::string_view text, int d);

// Normalizes nu2 for integer vectors when needed and says so on `note`.
ProblemInstance make_instance(const InstanceFlags& flags, std::ostream* note);

struct ExperimentFile {
  RunConfig run;
  std::string echo;  // the parsed config as compact JSON
};

// Schema: {m, n, norm1, norm2, psi, mod, res, theta: {kind, count?, values?},
// grid: {tmin, tmax, points}, seed}.  Unknown keys are rejected.
ExperimentFile parse_experiment_config(std::string_view text, std::ostream* note);
ExperimentFile load_experiment_config(const std::string& path, std::ostream* note);

// KGLAB_SEED, when set, replaces `seed`.
struct SeedChoice {
  std::uint64_t seed = 0;
  bool from_env = false;
};
SeedChoice resolve_seed(std::uint64_t seed);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace kglab::cli
