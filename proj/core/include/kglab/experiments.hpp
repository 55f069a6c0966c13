#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kglab/approx_fn.hpp"
#include "kglab/counting.hpp"

namespace kglab {

// Geometric grid from tmin to tmax; both endpoints are hit exactly.
struct GridSpec {
  double tmin = 10.0;
  double tmax = 1e6;
  std::size_t points = 61;
};

std::vector<double> geometric_grid(const GridSpec& spec);

struct ThetaSource {
  enum class Kind { uniform, list };
  Kind kind = Kind::uniform;
  std::size_t count = 20;           // uniform: number of draws from [0,1)^(mn)
  std::vector<ThetaMatrix> values;  // list
};

struct RunConfig {
  ProblemInstance instance;
  ThetaSource thetas;
  GridSpec grid;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// Draw i comes from its own stream derive_seed(seed, i), entries row-major.
std::vector<ThetaMatrix> draw_thetas(const RunConfig& config);

// Hypotheses of the asymptotic theorem that the config does not meet.
std::vector<std::string> config_warnings(const RunConfig& config);

struct ExperimentRecord {
  std::size_t theta_id = 0;
  double T = 0.0;
  std::uint64_t count = 0;
  double predicted = 0.0;  // N^-d c_nu1 c_nu2 Psi(T)
  double ratio = 0.0;
  double abs_error = 0.0;
};

// Ordered by theta_id, then T.
std::vector<ExperimentRecord> convergence_run(const RunConfig& config);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t used = 0;
  std::size_t dropped = 0;  // records with abs_error == 0
};

// Least squares of log(abs_error) against log(predicted).  Throws
// std::invalid_argument with fewer than 5 usable records.
ExponentFit error_exponent_fit(std::span<const ExperimentRecord> records);

// m = 2, n = 1, N = 1, sup norms.  Throws std::logic_error if the predicted
// column is not exactly 8 Psi(T).
std::vector<ExperimentRecord> classical_schmidt_check(
    const GridSpec& grid, std::size_t num_thetas, std::uint64_t seed,
    const ApproxFunction& psi = ApproxFunction::power(1.0, 0.5),
    unsigned threads = 1);

// Records of one theta, in T order.
std::vector<ExperimentRecord> records_for(std::span<const ExperimentRecord> records,
                                          std::size_t theta_id);

// Median ratio across thetas at each grid point.
std::vector<double> median_ratio_path(std::span<const ExperimentRecord> records);

// Smallest grid T from which the ratio stays inside [lo, hi] to the end of
// the grid, if any.
std::optional<double> entry_point(std::span<const ExperimentRecord> one_theta,
                                  double lo = 0.9, double hi = 1.1);

double median(std::vector<double> values);

std::string records_csv(std::span<const ExperimentRecord> records);

}  // namespace kglab
