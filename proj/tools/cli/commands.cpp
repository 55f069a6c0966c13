#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "kglab/counting.hpp"
#include "kglab/experiments.hpp"
#include "kglab/format.hpp"
#include "kglab/geometry.hpp"
#include "kglab/lattice_space.hpp"
#include "kglab/random.hpp"
#include "svg.hpp"

namespace kglab::cli {

namespace {

using nlohmann::json;

void add_instance_flags(CLI::App* app, InstanceFlags& f, bool congruence) {
  app->add_option("--m", f.m, "Dimension of p (rows of theta)")->required();
  app->add_option("--n", f.n, "Dimension of q (columns of theta)")->required();
  app->add_option("--norm1", f.norm1, "Norm on R^m: sup | lp:<p> | scaled:<f>:<norm>")
      ->capture_default_str();
  app->add_option("--norm2", f.norm2, "Norm on R^n, rescaled to integer minimum 1")
      ->capture_default_str();
  app->add_option("--psi", f.psi, "pow:<c>:<s> | powlog:<c>:<s> | const:<c> | table:<csv>")
      ->required();
  if (congruence) {
    app->add_option("--mod", f.modulus, "Modulus N of the congruence condition")
        ->capture_default_str();
    app->add_option("--res", f.residues, "Residues v, comma list of length m+n (default 0)");
  }
}

ThetaMatrix load_theta(const std::string& text, int m, int n) {
  try {
    if (text.starts_with("@")) return read_theta_file(text.substr(1), m, n);
    return parse_theta(text, m, n);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad --theta: ") + e.what());
  }
}

std::string meta_path(const std::string& csv) {
  const auto slash = csv.find_last_of('/');
  const auto dot = csv.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return csv.substr(0, dot) + ".meta.json";
  }
  return csv + ".meta.json";
}

// --- count -----------------------------------------------------------------

struct CountFlags {
  InstanceFlags instance;
  std::string theta;
  double T = 0.0;
  bool oracle = false;
  bool json_output = false;
};

int run_count(const CountFlags& f, std::ostream& out, std::ostream& err) {
  if (!(f.T > 1.0)) throw UsageError("--T must be > 1");
  const ProblemInstance instance = make_instance(f.instance, &err);
  if (instance.low_dimension_warning()) err << "warning: d = m + n < 3\n";
  const ThetaMatrix theta = load_theta(f.theta, f.instance.m, f.instance.n);
  const CountReport report = count_solutions_detailed(instance, theta, f.T);
  std::uint64_t oracle = 0;
  if (f.oracle) oracle = count_via_lattice_points(instance, theta, f.T);
  const bool mismatch = f.oracle && oracle != report.count;
  if (f.json_output) {
    json j{{"count", report.count}, {"near_ties", report.near_ties}};
    if (f.oracle) {
      j["oracle"] = oracle;
      j["match"] = !mismatch;
    }
    out << j.dump() << '\n';
  } else {
    out << "count=" << report.count << '\n';
    if (f.oracle) out << "oracle=" << oracle << '\n';
    if (report.near_ties > 0) err << "note: " << report.near_ties << " near ties\n";
  }
  if (mismatch) {
    err << "error: count_solutions " << report.count << " != lattice-point count "
        << oracle << '\n';
    return kOracleMismatch;
  }
  return kOk;
}

// --- volume ----------------------------------------------------------------

struct VolumeFlags {
  InstanceFlags instance;
  std::string region = "ET";
  double T = 0.0;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 1;
};

int run_volume(const VolumeFlags& f, std::ostream& out, std::ostream& err) {
  std::optional<RegionParams> params;
  if (!f.instance.psi.empty()) {
    if (!(f.T > 1.0)) throw UsageError("--T must be > 1");
    InstanceFlags flags = f.instance;
    flags.residues.clear();
    params = make_instance(flags, &err).region_params(f.T);
  }
  const RegionSpec region = [&] {
    try {
      return RegionSpec::parse(f.region, params);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    } catch (const std::domain_error& e) {
      throw UsageError(e.what());
    }
  }();
  out << "volume=" << format_double(region.volume()) << '\n';
  if (f.mc_samples > 0) {
    // Hit-or-miss against the bounding box.
    const SeedChoice seed = resolve_seed(f.seed);
    if (seed.from_env) err << "note: seed " << seed.seed << " from KGLAB_SEED\n";
    const Box box = region.bounding_box();
    double box_volume = 1.0;
    for (std::size_t i = 0; i < box.lo.size(); ++i) box_volume *= box.hi[i] - box.lo[i];
    Rng rng(seed.seed);
    std::vector<double> z(box.lo.size());
    std::uint64_t hits = 0;
    for (std::size_t s = 0; s < f.mc_samples; ++s) {
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.uniform(box.lo[i], box.hi[i]);
      if (region.contains(z)) ++hits;
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(f.mc_samples);
    const double se = box_volume * std::sqrt(frac * (1.0 - frac) / f.mc_samples);
    out << "monte_carlo=" << format_double(box_volume * frac) << '\n'
        << "std_error=" << format_double(se) << '\n';
  }
  return kOk;
}

// --- experiment ------------------------------------------------------------

struct ExperimentFlags {
  std::string config;
  std::string out;
  std::string plot;
  unsigned threads = 1;
};

std::string ratio_plot(std::span<const ExperimentRecord> records) {
  std::map<std::size_t, Series> by_theta;
  for (const auto& r : records) {
    auto& s = by_theta[r.theta_id];
    s.label = "theta " + std::to_string(r.theta_id);
    s.points.emplace_back(r.T, r.ratio);
  }
  std::vector<Series> series;
  for (auto& [id, s] : by_theta) series.push_back(std::move(s));
  PlotOptions options;
  options.x_label = "T";
  options.y_label = "count / predicted";
  options.log_x = true;
  options.reference_y = 1.0;
  return render_svg(series, options);
}

int run_experiment(const ExperimentFlags& f, std::ostream& out, std::ostream& err) {
  ExperimentFile file = load_experiment_config(f.config, &err);
  const SeedChoice seed = resolve_seed(file.run.seed);
  file.run.seed = seed.seed;
  file.run.threads = f.threads;
  for (const auto& w : config_warnings(file.run)) err << "warning: " << w << '\n';

  const auto start = std::chrono::steady_clock::now();
  const auto records = convergence_run(file.run);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_file(f.out, records_csv(records));
  if (!f.plot.empty()) write_file(f.plot, ratio_plot(records));

  const std::size_t thetas = file.run.thetas.kind == ThetaSource::Kind::list
                                 ? file.run.thetas.values.size()
                                 : file.run.thetas.count;
  std::vector<double> slopes;
  std::vector<double> final_ratios;
  for (std::size_t i = 0; i < thetas; ++i) {
    const auto mine = records_for(records, i);
    final_ratios.push_back(mine.back().ratio);
    try {
      slopes.push_back(error_exponent_fit(mine).slope);
    } catch (const std::invalid_argument&) {
    }
  }
  const auto& inst = file.run.instance;
  json meta{
      {"config", json::parse(file.echo)},
      {"seed", seed.seed},
      {"seed_source", seed.from_env ? "KGLAB_SEED" : "config"},
      {"version", std::string(kVersion)},
      {"threads", f.threads},
      {"wall_time_seconds", wall},
      {"norm2_effective", inst.nu2().to_string()},
      {"main_term_coefficient", inst.main_term_coefficient()},
      // |E_T| differs from the main term by at most c1 c2 psi(1) / N^d.
      {"main_term_offset_bound", inst.main_term_coefficient() * inst.psi()(1.0)},
      {"warnings", config_warnings(file.run)},
      {"median_final_ratio", median(final_ratios)},
  };
  meta["median_error_slope"] = slopes.empty() ? json(nullptr) : json(median(slopes));
  write_file(meta_path(f.out), meta.dump(2) + "\n");

  out << "records=" << records.size() << '\n'
      << "median_final_ratio=" << format_double(median(final_ratios)) << '\n';
  if (!slopes.empty()) out << "median_error_slope=" << format_double(median(slopes)) << '\n';
  return kOk;
}

// --- variance --------------------------------------------------------------

struct VarianceFlags {
  int d = 3;
  std::int64_t modulus = 1;
  std::string residues;
  std::int64_t prime = 40009;
  std::size_t samples = 2000;
  std::string volumes;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool no_rotate = false;
  std::string out;
};

int run_variance(const VarianceFlags& f, std::ostream& out, std::ostream& err) {
  if (f.d < 2) throw UsageError("--d must be >= 2");
  std::vector<double> volumes;
  for (const auto& token : split(f.volumes, ',')) {
    if (trim(token).empty()) continue;
    try {
      volumes.push_back(parse_double(trim(token)));
    } catch (const std::exception&) {
      throw UsageError("bad volume '" + token + "'");
    }
  }
  if (volumes.empty()) throw UsageError("--volumes: empty region list");
  const SeedChoice seed = resolve_seed(f.seed);
  if (seed.from_env) err << "note: seed " << seed.seed << " from KGLAB_SEED\n";

  LatticeSamplerConfig config;
  config.d = f.d;
  config.modulus = f.modulus;
  config.residues = parse_residues(f.residues, f.d);
  config.prime = f.prime;
  config.samples = f.samples;
  config.seed = seed.seed;
  config.rotate = !f.no_rotate;
  config.threads = f.threads;
  std::vector<RegionSpec> regions;
  try {
    regions = cube_family(f.d, volumes);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<VarianceRow> rows;
  try {
    rows = variance_experiment(config, regions);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string csv = variance_csv(rows);
  if (f.out.empty()) {
    out << csv;
  } else {
    write_file(f.out, csv);
  }
  return kOk;
}

// --- sandwich --------------------------------------------------------------

struct SandwichFlags {
  InstanceFlags instance;
  double eps = 0.1;
  double T = 0.0;
  std::size_t samples = 10000;
  std::string h = "random";
  std::size_t count = 1;
  std::uint64_t seed = 1;
  std::string out;
};

int run_sandwich(const SandwichFlags& f, std::ostream& out, std::ostream& err) {
  const SeedChoice seed = resolve_seed(f.seed);
  if (seed.from_env) err << "note: seed " << seed.seed << " from KGLAB_SEED\n";
  if (!(f.T > 10.0)) throw UsageError("--T must be > 10");
  if (!(f.eps > 0.0 && f.eps < 0.5)) throw UsageError("--eps must lie in (0, 1/2)");
  if (!admissible_epsilon(f.eps, f.instance.n)) {
    throw UsageError("--eps " + format_double(f.eps) + " is not admissible for n = " +
                     std::to_string(f.instance.n));
  }
  if (f.count == 0) throw UsageError("--count must be >= 1");
  InstanceFlags flags = f.instance;
  flags.residues.clear();
  const RegionParams params = make_instance(flags, &err).region_params(f.T);

  std::ostringstream csv;
  csv << "h_id,h,forward_checked,forward_violations,backward_checked,backward_violations\n";
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < f.count; ++i) {
    const std::uint64_t stream = derive_seed(seed.seed, i);
    const PerturbationElement h = [&] {
      if (f.h == "identity") return PerturbationElement::identity(params.m, params.n);
      if (f.h == "random") return sample_h_eps(f.eps, params, derive_seed(stream, 0));
      if (f.h.starts_with("shear:")) {
        double factor = 0.0;
        try {
          factor = parse_double(f.h.substr(6));
        } catch (const std::exception&) {
          throw UsageError("bad --h '" + f.h + "'");
        }
        if (!(factor > 0.0)) throw UsageError("shear factor must be > 0");
        return make_shear(f.eps, params, factor);
      }
      throw UsageError("--h must be identity, random or shear:<factor>");
    }();
    const SandwichReport report =
        sandwich_check(h, params, f.eps, f.samples, derive_seed(stream, 1));
    total += report.violations();
    csv << i << ',' << f.h << ',' << report.forward_checked << ','
        << report.forward_violations << ',' << report.backward_checked << ','
        << report.backward_violations << '\n';
    for (const auto& w : report.witnesses) {
      err << "violation h_id=" << i << " z=(";
      for (std::size_t k = 0; k < w.size(); ++k) err << (k ? "," : "") << format_double(w[k]);
      err << ")\n";
    }
  }
  if (f.out.empty()) {
    out << csv.str();
  } else {
    write_file(f.out, csv.str());
  }
  if (total > 0) {
    err << "error: " << total << " sandwich violations\n";
    return kViolation;
  }
  return kOk;
}

// --- plot ------------------------------------------------------------------

struct PlotFlags {
  std::string in;
  std::string out;
  std::string x = "T";
  std::string y = "ratio";
  std::string group = "theta_id";
  bool log_x = false;
  bool log_y = false;
  std::optional<double> reference;
};

int run_plot(const PlotFlags& f, std::ostream&, std::ostream& err) {
  std::istringstream in(read_file(f.in));
  std::string line;
  if (!std::getline(in, line)) throw UsageError(f.in + " is empty");
  const auto header = split(trim(line), ',');
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto cx = column(f.x);
  const auto cy = column(f.y);
  if (!cx) throw UsageError("no column '" + f.x + "' in " + f.in);
  if (!cy) throw UsageError("no column '" + f.y + "' in " + f.in);
  const auto cg = f.group.empty() ? std::nullopt : column(f.group);

  std::map<std::string, Series> groups;
  std::vector<std::string> order;
  std::size_t skipped = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != header.size()) {
      throw UsageError(f.in + ":" + std::to_string(line_no) + ": wrong number of fields");
    }
    double x = 0.0, y = 0.0;
    try {
      x = parse_double(cells[*cx]);
      y = parse_double(cells[*cy]);
    } catch (const std::exception&) {
      throw UsageError(f.in + ":" + std::to_string(line_no) + ": non-numeric value");
    }
    if ((f.log_x && x <= 0.0) || (f.log_y && y <= 0.0)) {
      ++skipped;
      continue;
    }
    const std::string key = cg ? cells[*cg] : std::string("all");
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) {
      order.push_back(key);
      it->second.label = cg ? f.group + " " + key : key;
    }
    it->second.points.emplace_back(x, y);
  }
  if (skipped > 0) err << "note: skipped " << skipped << " non-positive points on a log axis\n";
  std::vector<Series> series;
  for (const auto& key : order) series.push_back(std::move(groups[key]));
  PlotOptions options;
  options.x_label = f.x;
  options.y_label = f.y;
  options.log_x = f.log_x;
  options.log_y = f.log_y;
  options.reference_y = f.reference;
  try {
    write_file(f.out, render_svg(series, options));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counting and lattice experiments for Diophantine approximation", "kglab"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CountFlags count;
  auto* cmd_count = app.add_subcommand("count", "Count integer solutions for one theta and T");
  add_instance_flags(cmd_count, count.instance, true);
  cmd_count->add_option("--theta", count.theta, "Inline 'r11,r12;r21,r22' or @file")->required();
  cmd_count->add_option("--T", count.T, "Upper bound on nu2(q)^n")->required();
  cmd_count->add_flag("--oracle", count.oracle, "Also count via lattice points; exit 3 on mismatch");
  cmd_count->add_flag("--json", count.json_output, "Print a JSON object instead of key=value lines");

  VolumeFlags volume;
  auto* cmd_volume = app.add_subcommand("volume", "Closed-form region volume");
  cmd_volume->add_option("--region", volume.region,
                         "ET | Eminus:<e> | Eprime:<e> | Eplus:<e> | C0 | box:<lo>,<hi>;...")
      ->capture_default_str();
  cmd_volume->add_option("--m", volume.instance.m, "Dimension of x");
  cmd_volume->add_option("--n", volume.instance.n, "Dimension of y");
  cmd_volume->add_option("--norm1", volume.instance.norm1, "Norm on R^m")->capture_default_str();
  cmd_volume->add_option("--norm2", volume.instance.norm2, "Norm on R^n")->capture_default_str();
  cmd_volume->add_option("--psi", volume.instance.psi, "Approximation function (E-family regions)");
  cmd_volume->add_option("--T", volume.T, "Region parameter T (E-family regions)");
  cmd_volume->add_option("--mc", volume.mc_samples, "Also print a hit-or-miss estimate from this many samples");
  cmd_volume->add_option("--seed", volume.seed, "Seed for --mc")->capture_default_str();

  ExperimentFlags experiment;
  auto* cmd_experiment = app.add_subcommand("experiment", "Convergence run from a JSON config");
  cmd_experiment->add_option("--config", experiment.config, "JSON config file")->required();
  cmd_experiment->add_option("--out", experiment.out, "Records CSV; metadata goes to <base>.meta.json")
      ->required();
  cmd_experiment->add_option("--plot", experiment.plot, "Also write a ratio-vs-T SVG");
  cmd_experiment->add_option("--threads", experiment.threads, "Worker threads")->capture_default_str();

  VarianceFlags variance;
  auto* cmd_variance = app.add_subcommand("variance", "Lattice-count variance over nested cubes");
  cmd_variance->add_option("--d", variance.d, "Dimension")->capture_default_str();
  cmd_variance->add_option("--mod", variance.modulus, "Modulus N")->capture_default_str();
  cmd_variance->add_option("--res", variance.residues, "Residues v, comma list of length d (default 0)");
  cmd_variance->add_option("--prime", variance.prime, "Hecke prime p")->capture_default_str();
  cmd_variance->add_option("--samples", variance.samples, "Sampled lattices")->capture_default_str();
  cmd_variance->add_option("--volumes", variance.volumes, "Comma list of increasing cube volumes")
      ->required();
  cmd_variance->add_option("--seed", variance.seed, "Master seed")->capture_default_str();
  cmd_variance->add_option("--threads", variance.threads, "Worker threads")->capture_default_str();
  cmd_variance->add_flag("--no-rotate", variance.no_rotate, "Use raw Hecke lattices without a random rotation");
  cmd_variance->add_option("--out", variance.out, "CSV path (default stdout)");

  SandwichFlags sandwich;
  auto* cmd_sandwich = app.add_subcommand("sandwich", "Check E_minus in h E_T in E_plus by sampling");
  cmd_sandwich->set_help_flag("--help", "Print this help message and exit");
  add_instance_flags(cmd_sandwich, sandwich.instance, false);
  cmd_sandwich->add_option("--eps", sandwich.eps, "Perturbation size in (0, 1/2)")->required();
  cmd_sandwich->add_option("--T", sandwich.T, "Region parameter T > 10")->required();
  cmd_sandwich->add_option("--samples", sandwich.samples, "Points per direction and h")
      ->capture_default_str();
  cmd_sandwich->add_option("--h", sandwich.h, "identity | random | shear:<factor>")
      ->capture_default_str();
  cmd_sandwich->add_option("--count", sandwich.count, "Number of h to test")->capture_default_str();
  cmd_sandwich->add_option("--seed", sandwich.seed, "Master seed")->capture_default_str();
  cmd_sandwich->add_option("--out", sandwich.out, "CSV path (default stdout)");

  PlotFlags plot;
  auto* cmd_plot = app.add_subcommand("plot", "Line plot of two CSV columns as SVG");
  cmd_plot->add_option("--in", plot.in, "Input CSV")->required();
  cmd_plot->add_option("--out", plot.out, "Output SVG")->required();
  cmd_plot->add_option("--x", plot.x, "x column")->capture_default_str();
  cmd_plot->add_option("--y", plot.y, "y column")->capture_default_str();
  cmd_plot->add_option("--group", plot.group, "One path per value of this column; '' for one path")
      ->capture_default_str();
  cmd_plot->add_flag("--logx", plot.log_x, "Logarithmic x axis");
  cmd_plot->add_flag("--logy", plot.log_y, "Logarithmic y axis");
  cmd_plot->add_option("--ref", plot.reference, "Horizontal reference line at this y");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (cmd_count->parsed()) return run_count(count, out, err);
    if (cmd_volume->parsed()) return run_volume(volume, out, err);
    if (cmd_experiment->parsed()) return run_experiment(experiment, out, err);
    if (cmd_variance->parsed()) return run_variance(variance, out, err);
    if (cmd_sandwich->parsed()) return run_sandwich(sandwich, out, err);
    if (cmd_plot->parsed()) return run_plot(plot, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace kglab::cli
