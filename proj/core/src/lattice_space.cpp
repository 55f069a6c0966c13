#include "kglab/lattice_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "kglab/format.hpp"
#include "kglab/parallel.hpp"
#include "kglab/random.hpp"

namespace kglab {

namespace {

std::int64_t mod_inverse(std::int64_t a, std::int64_t p) {
  std::int64_t r0 = p, r1 = ((a % p) + p) % p;
  std::int64_t t0 = 0, t1 = 1;
  while (r1 != 0) {
    const std::int64_t q = r0 / r1;
    std::tie(r0, r1) = std::pair(r1, r0 - q * r1);
    std::tie(t0, t1) = std::pair(t1, t0 - q * t1);
  }
  if (r0 != 1) throw std::domain_error("mod_inverse: not invertible");
  return ((t0 % p) + p) % p;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> AffineLattice::shift() const {
  std::vector<double> w(shift_class.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = static_cast<double>(shift_class[i]) / static_cast<double>(modulus);
  }
  return multiply(basis, w);
}

bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t f = 2; f * f <= p; ++f)
    if (p % f == 0) return false;
  return true;
}

IntMatrix hnf_sublattice_basis(std::span<const std::int64_t> a, std::int64_t p) {
  if (!is_prime(p)) throw std::invalid_argument("hnf_sublattice_basis: p must be prime");
  const std::size_t d = a.size();
  std::size_t j = d;
  for (std::size_t i = 0; i < d; ++i) {
    if (((a[i] % p) + p) % p != 0) {
      j = i;
      break;
    }
  }
  if (j == d) throw std::invalid_argument("hnf_sublattice_basis: a = 0 mod p");
  const std::int64_t inv = mod_inverse(a[j], p);
  IntMatrix basis = IntMatrix::identity(d);
  basis(j, j) = p;
  for (std::size_t i = 0; i < d; ++i) {
    if (i == j) continue;
    const std::int64_t c = (((a[i] % p) + p) % p) * inv % p;
    basis(j, i) = -c;
  }
  return basis;
}

UnimodularLattice hecke_sample(int d, std::int64_t p, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("hecke_sample: d must be >= 2");
  if (!is_prime(p)) throw std::invalid_argument("hecke_sample: p must be prime");
  Rng rng(seed);
  std::vector<std::int64_t> a(d);
  do {
    for (auto& ai : a) ai = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(p)));
  } while (std::all_of(a.begin(), a.end(), [](auto x) { return x == 0; }));
  const double scale = std::pow(static_cast<double>(p), -1.0 / d);
  return {scale * to_real(hnf_sublattice_basis(a, p)), p, std::move(a)};
}

AffineLattice sample_affine_cover(const UnimodularLattice& lattice,
                                  std::span<const std::int64_t> v,
                                  std::int64_t N, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("sample_affine_cover: N must be >= 1");
  const int d = static_cast<int>(lattice.basis.rows());
  if (!v.empty() && static_cast<int>(v.size()) != d) {
    throw std::invalid_argument("sample_affine_cover: residue vector has wrong length");
  }
  AffineLattice out{lattice.basis, std::vector<std::int64_t>(d, 0), N};
  if (N == 1) return out;
  std::int64_t content = N;
  for (auto x : v) content = std::gcd(content, x);
  Rng rng(seed);
  while (true) {
    std::int64_t g = N;
    for (auto& w : out.shift_class) {
      w = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(N)));
      g = std::gcd(g, w);
    }
    if (g == content) return out;
  }
}

RealMatrix lll_reduce(const RealMatrix& basis, double delta) {
  const std::size_t d = basis.cols();
  std::vector<std::vector<double>> b(d);
  for (std::size_t k = 0; k < d; ++k) b[k] = basis.column(k);

  std::vector<std::vector<double>> gs(d);
  std::vector<double> gs_norm(d);
  auto recompute = [&] {
    for (std::size_t i = 0; i < d; ++i) {
      gs[i] = b[i];
      for (std::size_t j = 0; j < i; ++j) {
        const double mu = dot(b[i], gs[j]) / gs_norm[j];
        for (std::size_t r = 0; r < gs[i].size(); ++r) gs[i][r] -= mu * gs[j][r];
      }
      gs_norm[i] = dot(gs[i], gs[i]);
    }
  };

  recompute();
  std::size_t k = 1;
  int guard = 0;
  while (k < d) {
    if (++guard > 100000) throw std::runtime_error("lll_reduce: no convergence");
    for (std::size_t j = k; j-- > 0;) {
      const double mu = dot(b[k], gs[j]) / gs_norm[j];
      if (std::abs(mu) > 0.5) {
        const double r = std::round(mu);
        for (std::size_t i = 0; i < b[k].size(); ++i) b[k][i] -= r * b[j][i];
      }
    }
    recompute();
    const double mu = dot(b[k], gs[k - 1]) / gs_norm[k - 1];
    if (gs_norm[k] >= (delta - mu * mu) * gs_norm[k - 1]) {
      ++k;
    } else {
      std::swap(b[k], b[k - 1]);
      recompute();
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
  RealMatrix out(basis.rows(), d);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t r = 0; r < basis.rows(); ++r) out(r, c) = b[c][r];
  return out;
}

RealMatrix random_rotation(int d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> q(d, std::vector<double>(d));
  for (auto& col : q)
    for (auto& x : col) x = rng.normal();
  // Gram-Schmidt gives the Q factor with positive R diagonal: Haar on O(d).
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < i; ++j) {
      const double c = dot(q[i], q[j]);
      for (int r = 0; r < d; ++r) q[i][r] -= c * q[j][r];
    }
    const double norm = std::sqrt(dot(q[i], q[i]));
    for (auto& x : q[i]) x /= norm;
  }
  RealMatrix out(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) out(r, c) = q[c][r];
  if (determinant(out) < 0.0)
    for (int r = 0; r < d; ++r) out(r, 0) = -out(r, 0);
  return out;
}

std::uint64_t count_in_region(const AffineLattice& lattice, const RegionSpec& region) {
  const int d = lattice.dim();
  if (region.dim() != d) throw std::invalid_argument("count_in_region: dimension mismatch");
  const RealMatrix reduced = lll_reduce(lattice.basis);
  const RealMatrix inv = inverse(reduced);
  const double cond = max_abs_row_sum(reduced) * max_abs_row_sum(inv);
  if (!(cond <= 1e12)) {
    throw std::domain_error("count_in_region: ill-conditioned basis (cond " +
                            format_double(cond) + ")");
  }
  const std::vector<double> shift = lattice.shift();
  const bool zero_shift = std::all_of(lattice.shift_class.begin(),
                                      lattice.shift_class.end(),
                                      [](auto w) { return w == 0; });

  // Coefficient box: the image of the bounding box under reduced^-1.
  const Box bbox = region.bounding_box();
  std::vector<std::int64_t> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    double center = 0.0, width = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = 0.5 * (bbox.lo[j] + bbox.hi[j]) - shift[j];
      const double h = 0.5 * (bbox.hi[j] - bbox.lo[j]);
      center += inv(i, j) * c;
      width += std::abs(inv(i, j)) * h;
    }
    lo[i] = static_cast<std::int64_t>(std::floor(center - width)) - 1;
    hi[i] = static_cast<std::int64_t>(std::ceil(center + width)) + 1;
  }

  std::uint64_t total = 0;
  std::vector<std::int64_t> z = lo;
  std::vector<double> point(d);
  while (true) {
    bool origin = zero_shift;
    for (int r = 0; r < d; ++r) {
      double s = shift[r];
      for (int c = 0; c < d; ++c) s += reduced(r, c) * static_cast<double>(z[c]);
      point[r] = s;
    }
    if (origin)
      for (int c = 0; c < d; ++c) origin = origin && z[c] == 0;
    if (!origin && region.contains(point)) ++total;
    int i = d - 1;
    while (i >= 0 && z[i] == hi[i]) {
      z[i] = lo[i];
      --i;
    }
    if (i < 0) break;
    ++z[i];
  }
  return total;
}

AffineLattice sample_lattice(const LatticeSamplerConfig& config, std::size_t index) {
  const std::uint64_t stream = derive_seed(config.seed, index);
  UnimodularLattice lattice = hecke_sample(config.d, config.prime, derive_seed(stream, 0));
  if (config.rotate) {
    lattice.basis = random_rotation(config.d, derive_seed(stream, 1)) * lattice.basis;
  }
  return sample_affine_cover(lattice, config.residues, config.modulus,
                             derive_seed(stream, 2));
}

namespace {

void validate(const LatticeSamplerConfig& config) {
  if (config.d < 2) throw std::invalid_argument("lattice sampler: d must be >= 2");
  if (config.modulus < 1) throw std::invalid_argument("lattice sampler: N must be >= 1");
  if (!config.residues.empty() && static_cast<int>(config.residues.size()) != config.d) {
    throw std::invalid_argument("lattice sampler: residue vector must have length d");
  }
  if (!is_prime(config.prime)) throw std::invalid_argument("lattice sampler: p must be prime");
  if (config.samples < 2) throw std::invalid_argument("lattice sampler: need >= 2 samples");
}

// counts[i * regions + r]
std::vector<std::uint64_t> sample_counts(const LatticeSamplerConfig& config,
                                         std::span<const RegionSpec> regions) {
  validate(config);
  for (const auto& r : regions)
    if (r.dim() != config.d) throw std::invalid_argument("region dimension must equal d");
  const std::size_t k = regions.size();
  std::vector<std::uint64_t> counts(config.samples * k, 0);
  parallel_for(config.samples, config.threads, [&](std::size_t i) {
    const AffineLattice lattice = sample_lattice(config, i);
    for (std::size_t r = 0; r < k; ++r) counts[i * k + r] = count_in_region(lattice, regions[r]);
  });
  return counts;
}

}  // namespace

MeanValueResult mean_value_experiment(const LatticeSamplerConfig& config,
                                      const RegionSpec& region) {
  const auto counts = sample_counts(config, std::span(&region, 1));
  const auto n = static_cast<double>(counts.size());
  double sum = 0.0;
  for (auto c : counts) sum += static_cast<double>(c);
  const double mean = sum / n;
  double ss = 0.0;
  for (auto c : counts) ss += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
  const double variance = ss / (n - 1.0);
  return {mean, std::sqrt(variance / n), region.volume(), counts.size()};
}

std::vector<VarianceRow> variance_experiment(const LatticeSamplerConfig& config,
                                             std::span<const RegionSpec> regions) {
  if (regions.empty()) throw std::invalid_argument("variance_experiment: no regions");
  const auto counts = sample_counts(config, regions);
  const std::size_t k = regions.size();
  const auto n = static_cast<double>(config.samples);
  std::vector<VarianceRow> rows;
  for (std::size_t r = 0; r < k; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < config.samples; ++i) sum += static_cast<double>(counts[i * k + r]);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < config.samples; ++i) {
      const double dev = static_cast<double>(counts[i * k + r]) - mean;
      ss += dev * dev;
    }
    const double variance = ss / (n - 1.0);
    const double volume = regions[r].volume();
    rows.push_back({r, volume, mean, variance, volume > 0.0 ? variance / volume : 0.0,
                    config.samples, config.prime, config.seed});
  }
  return rows;
}

std::vector<RegionSpec> cube_family(int d, std::span<const double> volumes) {
  if (volumes.empty()) throw std::invalid_argument("cube_family: empty volume list");
  std::vector<RegionSpec> out;
  double prev = 0.0;
  for (double v : volumes) {
    if (!(v > prev) || !std::isfinite(v)) {
      throw std::invalid_argument("cube_family: volumes must be positive and increasing");
    }
    prev = v;
    const double side = std::pow(v, 1.0 / d);
    out.push_back(RegionSpec::box(std::vector<double>(d, 1.0),
                                  std::vector<double>(d, 1.0 + side)));
  }
  return out;
}

std::string variance_csv(std::span<const VarianceRow> rows) {
  std::ostringstream out;
  out << "region_id,volume,mean_count,variance,ratio,samples,prime,seed\n";
  for (const auto& r : rows) {
    out << r.region_id << ',' << format_double(r.volume) << ','
        << format_double(r.mean_count) << ',' << format_double(r.variance) << ','
        << format_double(r.ratio) << ',' << r.samples << ',' << r.prime << ','
        << r.seed << '\n';
  }
  return out.str();
}

}  // namespace kglab
