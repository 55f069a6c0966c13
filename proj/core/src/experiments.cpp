#include "kglab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "kglab/format.hpp"
#include "kglab/parallel.hpp"
#include "kglab/random.hpp"

namespace kglab {

std::vector<double> geometric_grid(const GridSpec& spec) {
  if (!(spec.tmin > 1.0) || !std::isfinite(spec.tmax)) {
    throw std::invalid_argument("grid: tmin must be > 1 and tmax finite");
  }
  if (spec.points == 0) throw std::invalid_argument("grid: points must be >= 1");
  if (spec.points == 1) {
    if (spec.tmin != spec.tmax) {
      throw std::invalid_argument("grid: a single point needs tmin == tmax");
    }
    return {spec.tmin};
  }
  if (!(spec.tmax > spec.tmin)) throw std::invalid_argument("grid: tmax must exceed tmin");
  std::vector<double> grid(spec.points);
  const double span = std::log(spec.tmax / spec.tmin);
  const double last = static_cast<double>(spec.points - 1);
  for (std::size_t i = 0; i < spec.points; ++i) {
    grid[i] = spec.tmin * std::exp(span * static_cast<double>(i) / last);
  }
  grid.front() = spec.tmin;
  grid.back() = spec.tmax;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid: points too dense");
  }
  return grid;
}

std::vector<ThetaMatrix> draw_thetas(const RunConfig& config) {
  const int m = config.instance.m();
  const int n = config.instance.n();
  if (config.thetas.kind == ThetaSource::Kind::list) {
    if (config.thetas.values.empty()) throw std::invalid_argument("theta list is empty");
    for (const auto& t : config.thetas.values) {
      if (static_cast<int>(t.rows()) != m || static_cast<int>(t.cols()) != n) {
        throw std::invalid_argument("theta list entry has the wrong shape");
      }
    }
    return config.thetas.values;
  }
  if (config.thetas.count == 0) throw std::invalid_argument("theta count must be >= 1");
  std::vector<ThetaMatrix> out;
  out.reserve(config.thetas.count);
  for (std::size_t i = 0; i < config.thetas.count; ++i) {
    Rng rng(derive_seed(config.seed, i));
    ThetaMatrix theta(m, n);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) theta(r, c) = rng.uniform();
    out.push_back(std::move(theta));
  }
  return out;
}

std::vector<std::string> config_warnings(const RunConfig& config) {
  std::vector<std::string> out;
  const auto div = config.instance.psi().divergence();
  if (div != Divergence::divergent) {
    out.push_back("sum of psi is " + std::string(to_string(div)) +
                  "; the asymptotic only applies to divergent sums");
  }
  if (config.instance.low_dimension_warning()) {
    out.push_back("d = m + n < 3; the asymptotic assumes d >= 3");
  }
  return out;
}

std::vector<ExperimentRecord> convergence_run(const RunConfig& config) {
  const std::vector<double> grid = geometric_grid(config.grid);
  const std::vector<ThetaMatrix> thetas = draw_thetas(config);
  const double coefficient = config.instance.main_term_coefficient();
  const std::vector<double> psi_sums = partial_sums(config.instance.psi(), grid);

  std::vector<std::vector<std::uint64_t>> counts(thetas.size());
  parallel_for(thetas.size(), config.threads, [&](std::size_t i) {
    counts[i] = count_solutions_grid(config.instance, thetas[i], grid);
  });

  std::vector<ExperimentRecord> records;
  records.reserve(thetas.size() * grid.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      ExperimentRecord r;
      r.theta_id = i;
      r.T = grid[k];
      r.count = counts[i][k];
      r.predicted = coefficient * psi_sums[k];
      const double c = static_cast<double>(r.count);
      r.ratio = c / r.predicted;
      r.abs_error = std::abs(c - r.predicted);
      records.push_back(r);
    }
  }
  return records;
}

ExponentFit error_exponent_fit(std::span<const ExperimentRecord> records) {
  ExponentFit fit;
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    if (r.abs_error > 0.0 && r.predicted > 0.0) {
      xs.push_back(std::log(r.predicted));
      ys.push_back(std::log(r.abs_error));
    } else {
      ++fit.dropped;
    }
  }
  fit.used = xs.size();
  if (fit.used < 5) {
    throw std::invalid_argument("error_exponent_fit: fewer than 5 usable points (" +
                                std::to_string(fit.used) + ")");
  }
  const double n = static_cast<double>(fit.used);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("error_exponent_fit: predicted is constant");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

std::vector<ExperimentRecord> classical_schmidt_check(const GridSpec& grid,
                                                      std::size_t num_thetas,
                                                      std::uint64_t seed,
                                                      const ApproxFunction& psi,
                                                      unsigned threads) {
  RunConfig config{ProblemInstance(2, 1, NormSpec::sup(2), NormSpec::sup(1), psi,
                                   CongruenceClass::trivial(3)),
                   ThetaSource{ThetaSource::Kind::uniform, num_thetas, {}},
                   grid, seed, threads};
  auto records = convergence_run(config);
  const std::vector<double> g = geometric_grid(grid);
  const std::vector<double> sums = partial_sums(psi, g);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].predicted != 8.0 * sums[i % g.size()]) {
      throw std::logic_error("classical_schmidt_check: predicted differs from 8 Psi(T)");
    }
  }
  return records;
}

std::vector<ExperimentRecord> records_for(std::span<const ExperimentRecord> records,
                                          std::size_t theta_id) {
  std::vector<ExperimentRecord> out;
  for (const auto& r : records)
    if (r.theta_id == theta_id) out.push_back(r);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size() / 2;
  return values.size() % 2 == 1 ? values[k] : 0.5 * (values[k - 1] + values[k]);
}

std::vector<double> median_ratio_path(std::span<const ExperimentRecord> records) {
  std::map<double, std::vector<double>> by_t;
  for (const auto& r : records) by_t[r.T].push_back(r.ratio);
  std::vector<double> out;
  for (auto& [t, ratios] : by_t) out.push_back(median(std::move(ratios)));
  return out;
}

std::optional<double> entry_point(std::span<const ExperimentRecord> one_theta,
                                  double lo, double hi) {
  std::optional<double> entry;
  for (const auto& r : one_theta) {
    if (r.ratio >= lo && r.ratio <= hi) {
      if (!entry) entry = r.T;
    } else {
      entry.reset();
    }
  }
  return entry;
}

std::string records_csv(std::span<const ExperimentRecord> records) {
  std::ostringstream out;
  out << "theta_id,T,count,predicted,ratio,abs_error\n";
  for (const auto& r : records) {
    out << r.theta_id << ',' << format_double(r.T) << ',' << r.count << ','
        << format_double(r.predicted) << ',' << format_double(r.ratio) << ','
        << format_double(r.abs_error) << '\n';
  }
  return out.str();
}

}  // namespace kglab
