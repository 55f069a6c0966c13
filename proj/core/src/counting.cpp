#include "kglab/counting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "kglab/format.hpp"

namespace kglab {

namespace {

constexpr double kTieTolerance = 1e-12;

std::int64_t floor_mod(std::int64_t a, std::int64_t n) {
  const std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

// Smallest x = v (mod N) with x > a.
std::int64_t first_member_above(double a, std::int64_t v, std::int64_t N) {
  auto k = static_cast<std::int64_t>(std::floor((a - static_cast<double>(v)) / N)) + 1;
  while (static_cast<double>(v + (k - 1) * N) > a) --k;
  while (static_cast<double>(v + k * N) <= a) ++k;
  return v + k * N;
}

// Largest x = v (mod N) with x < b.
std::int64_t last_member_below(double b, std::int64_t v, std::int64_t N) {
  auto k = static_cast<std::int64_t>(std::ceil((b - static_cast<double>(v)) / N)) - 1;
  while (static_cast<double>(v + (k + 1) * N) < b) ++k;
  while (static_cast<double>(v + k * N) >= b) --k;
  return v + k * N;
}

void check_theta(const ProblemInstance& inst, const ThetaMatrix& theta) {
  if (static_cast<int>(theta.rows()) != inst.m() ||
      static_cast<int>(theta.cols()) != inst.n()) {
    throw std::invalid_argument("theta must be an m x n matrix");
  }
  for (std::size_t r = 0; r < theta.rows(); ++r)
    for (double v : theta.row(r))
      if (!std::isfinite(v)) throw std::invalid_argument("theta has non-finite entries");
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b) {
    throw std::overflow_error("solution count overflows 64 bits");
  }
  return a + b;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b) {
    throw std::overflow_error("solution count overflows 64 bits");
  }
  return a * b;
}

// Number of p = v_p (mod N) with nu1(s + p)^m < psi_t, for s = theta q.
class PCounter {
 public:
  explicit PCounter(const ProblemInstance& inst)
      : nu1_(inst.nu1()),
        m_(inst.m()),
        modulus_(inst.congruence().modulus()),
        residues_(inst.congruence().residues().begin(),
                  inst.congruence().residues().begin() + inst.m()),
        x_(inst.m()),
        p_(inst.m()),
        lo_(inst.m()),
        hi_(inst.m()) {}

  std::uint64_t count(std::span<const double> s, double psi_t,
                      std::uint64_t* near_ties) {
    return nu1_.is_sup_family() ? count_sup(s, psi_t, near_ties)
                                : count_box(s, psi_t, near_ties);
  }

 private:
  // The sup norm factorizes over coordinates, so each coordinate contributes
  // an arithmetic progression.  Its ends come from the interval
  // (-s - r, -s + r) and are then settled with the same predicate the
  // enumeration paths evaluate, so all paths agree bit for bit.
  std::uint64_t count_sup(std::span<const double> s, double psi_t,
                          std::uint64_t* near_ties) {
    const double f = nu1_.factor();
    const double r = std::pow(psi_t, 1.0 / m_) / f;
    auto value = [&](double si, std::int64_t p) {
      return ipow(f * std::abs(si + static_cast<double>(p)), m_);
    };
    std::uint64_t total = 1;
    for (int i = 0; i < m_; ++i) {
      const std::int64_t v = residues_[i];
      std::int64_t lo = first_member_above(-s[i] - r - 1.0, v, modulus_);
      std::int64_t hi = last_member_below(-s[i] + r + 1.0, v, modulus_);
      while (lo <= hi && !(value(s[i], lo) < psi_t)) lo += modulus_;
      while (hi >= lo && !(value(s[i], hi) < psi_t)) hi -= modulus_;
      if (near_ties) {
        for (std::int64_t p : {lo - modulus_, lo, hi, hi + modulus_})
          if (std::abs(value(s[i], p) - psi_t) < kTieTolerance) ++*near_ties;
      }
      if (lo > hi) return 0;
      total = checked_mul(total, static_cast<std::uint64_t>((hi - lo) / modulus_ + 1));
    }
    return total;
  }

  std::uint64_t count_box(std::span<const double> s, double psi_t,
                          std::uint64_t* near_ties) {
    const double radius = std::pow(psi_t, 1.0 / m_) / nu1_.kappa_low();
    for (int i = 0; i < m_; ++i) {
      lo_[i] = first_member_above(-s[i] - radius - 1.0, residues_[i], modulus_);
      hi_[i] = last_member_below(-s[i] + radius + 1.0, residues_[i], modulus_);
      if (lo_[i] > hi_[i]) return 0;
      p_[i] = lo_[i];
    }
    std::uint64_t total = 0;
    while (true) {
      for (int i = 0; i < m_; ++i) x_[i] = s[i] + static_cast<double>(p_[i]);
      const double a = ipow(nu1_(x_), m_);
      if (a < psi_t) ++total;
      if (near_ties && std::abs(a - psi_t) < kTieTolerance) ++*near_ties;
      int i = m_ - 1;
      while (i >= 0 && p_[i] + modulus_ > hi_[i]) {
        p_[i] = lo_[i];
        --i;
      }
      if (i < 0) break;
      p_[i] += modulus_;
    }
    return total;
  }

  const NormSpec& nu1_;
  int m_;
  std::int64_t modulus_;
  std::vector<std::int64_t> residues_;
  std::vector<double> x_;
  std::vector<std::int64_t> p_, lo_, hi_;
};

// Odometer over the class members of a box, one range per coordinate.
template <typename Visit>
void for_each_member(const std::vector<std::int64_t>& lo,
                     const std::vector<std::int64_t>& hi, std::int64_t step,
                     Visit&& visit) {
  const std::size_t k = lo.size();
  for (std::size_t i = 0; i < k; ++i)
    if (lo[i] > hi[i]) return;
  std::vector<std::int64_t> cur = lo;
  while (true) {
    visit(std::as_const(cur));
    std::size_t i = k;
    while (i > 0 && cur[i - 1] + step > hi[i - 1]) {
      cur[i - 1] = lo[i - 1];
      --i;
    }
    if (i == 0) return;
    cur[i - 1] += step;
  }
}

std::int64_t q_radius(const ProblemInstance& inst, double T) {
  return static_cast<std::int64_t>(
             std::floor(std::pow(T, 1.0 / inst.n()) / inst.nu2().kappa_low())) +
         1;
}

}  // namespace

CongruenceClass::CongruenceClass(std::vector<std::int64_t> residues,
                                 std::int64_t modulus)
    : residues_(std::move(residues)), modulus_(modulus) {
  if (modulus_ < 1) throw std::invalid_argument("modulus N must be >= 1");
  if (residues_.empty()) throw std::invalid_argument("residue vector is empty");
  for (auto& r : residues_) r = floor_mod(r, modulus_);
}

std::int64_t CongruenceClass::content() const {
  std::int64_t g = modulus_;
  for (auto r : residues_) g = std::gcd(g, r);
  return g;
}

ThetaMatrix parse_theta(std::string_view text, int m, int n) {
  const auto rows = split(trim(text), ';');
  if (static_cast<int>(rows.size()) != m) {
    throw std::invalid_argument("theta: expected " + std::to_string(m) +
                                " rows separated by ';'");
  }
  ThetaMatrix theta(m, n);
  for (int i = 0; i < m; ++i) {
    const auto cols = split(rows[i], ',');
    if (static_cast<int>(cols.size()) != n) {
      throw std::invalid_argument("theta: expected " + std::to_string(n) +
                                  " entries in row " + std::to_string(i + 1));
    }
    for (int j = 0; j < n; ++j) theta(i, j) = parse_double(cols[j]);
  }
  return theta;
}

ThetaMatrix read_theta_file(const std::string& path, int m, int n) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("theta: cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::string normalized(body);
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::istringstream fields(normalized);
    std::vector<double> row;
    std::string token;
    while (fields >> token) row.push_back(parse_double(token));
    rows.push_back(std::move(row));
  }
  if (static_cast<int>(rows.size()) != m) {
    throw std::invalid_argument("theta file: expected " + std::to_string(m) + " rows");
  }
  ThetaMatrix theta(m, n);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(rows[i].size()) != n) {
      throw std::invalid_argument("theta file: expected " + std::to_string(n) +
                                  " columns per row");
    }
    for (int j = 0; j < n; ++j) theta(i, j) = rows[i][j];
  }
  return theta;
}

ProblemInstance::ProblemInstance(int m, int n, NormSpec nu1, NormSpec nu2,
                                 ApproxFunction psi, CongruenceClass cong)
    : m_(m),
      n_(n),
      nu1_(std::move(nu1)),
      nu2_(std::move(nu2)),
      psi_(std::move(psi)),
      cong_(std::move(cong)) {
  if (m_ < 1 || n_ < 1) throw std::invalid_argument("m and n must be >= 1");
  if (nu1_.dim() != m_ || nu2_.dim() != n_) {
    throw std::invalid_argument("norm dimensions must be m and n");
  }
  if (cong_.dim() != m_ + n_) {
    throw std::invalid_argument("residue vector must have length d = m + n");
  }
  const double min_norm = integer_min_norm(nu2_).value;
  if (!(std::abs(min_norm - 1.0) <= 1e-12)) {
    throw std::invalid_argument("nu2 is not normalized: integer minimum is " +
                                format_double(min_norm));
  }
}

RegionParams ProblemInstance::region_params(double T) const {
  return {m_, n_, nu1_, nu2_, psi_, T};
}

double ProblemInstance::main_term_coefficient() const {
  return ball_volume_constant(nu1_) * ball_volume_constant(nu2_) /
         std::pow(static_cast<double>(cong_.modulus()), d());
}

std::int64_t count_congruent_in_interval(double a, double b, std::int64_t v,
                                         std::int64_t N) {
  if (N < 1) throw std::invalid_argument("modulus must be >= 1");
  if (!(a < b)) return 0;
  v = floor_mod(v, N);
  const std::int64_t lo = first_member_above(a, v, N);
  const std::int64_t hi = last_member_below(b, v, N);
  return lo > hi ? 0 : (hi - lo) / N + 1;
}

void for_each_q(const ProblemInstance& inst, double T,
                const std::function<void(const QPoint&)>& visit) {
  if (!(T > 1.0) || !std::isfinite(T)) throw std::domain_error("T must be finite and > 1");
  const int n = inst.n();
  const auto& cong = inst.congruence();
  const std::int64_t N = cong.modulus();
  const std::int64_t radius = q_radius(inst, T);
  std::vector<std::int64_t> lo(n), hi(n);
  for (int j = 0; j < n; ++j) {
    const std::int64_t v = cong.residues()[inst.m() + j];
    lo[j] = first_member_above(static_cast<double>(-radius) - 0.5, v, N);
    hi[j] = last_member_below(static_cast<double>(radius) + 0.5, v, N);
  }
  QPoint point;
  std::vector<double> qd(n);
  for_each_member(lo, hi, N, [&](const std::vector<std::int64_t>& q) {
    for (int j = 0; j < n; ++j) qd[j] = static_cast<double>(q[j]);
    const double t = ipow(inst.nu2()(qd), n);
    if (t >= 1.0 && t < T) {
      point.q = q;
      point.t = t;
      visit(point);
    }
  });
}

std::vector<QPoint> enumerate_q(const ProblemInstance& inst, double T) {
  std::vector<QPoint> out;
  for_each_q(inst, T, [&](const QPoint& q) { out.push_back(q); });
  return out;
}

CountReport count_solutions_detailed(const ProblemInstance& inst,
                                     const ThetaMatrix& theta, double T) {
  check_theta(inst, theta);
  PCounter counter(inst);
  CountReport report;
  std::vector<double> qd(inst.n());
  for_each_q(inst, T, [&](const QPoint& q) {
    for (int j = 0; j < inst.n(); ++j) qd[j] = static_cast<double>(q.q[j]);
    const auto s = multiply(theta, qd);
    report.count = checked_add(report.count,
                               counter.count(s, inst.psi()(q.t), &report.near_ties));
  });
  return report;
}

std::uint64_t count_solutions(const ProblemInstance& inst,
                              const ThetaMatrix& theta, double T) {
  check_theta(inst, theta);
  PCounter counter(inst);
  std::uint64_t total = 0;
  std::vector<double> qd(inst.n());
  for_each_q(inst, T, [&](const QPoint& q) {
    for (int j = 0; j < inst.n(); ++j) qd[j] = static_cast<double>(q.q[j]);
    total = checked_add(total, counter.count(multiply(theta, qd), inst.psi()(q.t), nullptr));
  });
  return total;
}

std::vector<std::uint64_t> count_solutions_grid(const ProblemInstance& inst,
                                                const ThetaMatrix& theta,
                                                std::span<const double> grid) {
  check_theta(inst, theta);
  if (grid.empty()) return {};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 1.0)) throw std::domain_error("grid values must be > 1");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("grid must be strictly increasing");
    }
  }
  // bucket[i] collects q with grid[i-1] <= t < grid[i].
  std::vector<std::uint64_t> bucket(grid.size(), 0);
  PCounter counter(inst);
  std::vector<double> qd(inst.n());
  for_each_q(inst, grid.back(), [&](const QPoint& q) {
    for (int j = 0; j < inst.n(); ++j) qd[j] = static_cast<double>(q.q[j]);
    const std::uint64_t c = counter.count(multiply(theta, qd), inst.psi()(q.t), nullptr);
    if (c == 0) return;
    const auto idx = static_cast<std::size_t>(
        std::upper_bound(grid.begin(), grid.end(), q.t) - grid.begin());
    bucket[idx] = checked_add(bucket[idx], c);
  });
  for (std::size_t i = 1; i < bucket.size(); ++i)
    bucket[i] = checked_add(bucket[i], bucket[i - 1]);
  return bucket;
}

std::uint64_t count_via_lattice_points(const ProblemInstance& inst,
                                       const ThetaMatrix& theta, double T) {
  check_theta(inst, theta);
  const RegionSpec region = RegionSpec::e_t(inst.region_params(T));
  const Box bbox = region.bounding_box();
  const int m = inst.m();
  const int n = inst.n();
  const int d = m + n;
  const std::int64_t N = inst.congruence().modulus();
  const auto& v = inst.congruence().residues();

  std::vector<std::int64_t> qlo(n), qhi(n);
  for (int j = 0; j < n; ++j) {
    qlo[j] = first_member_above(std::floor(bbox.lo[m + j]) - 1.0, v[m + j], N);
    qhi[j] = last_member_below(std::ceil(bbox.hi[m + j]) + 1.0, v[m + j], N);
  }
  std::uint64_t total = 0;
  std::vector<double> z(d), qd(n);
  std::vector<std::int64_t> plo(m), phi(m);
  for_each_member(qlo, qhi, N, [&](const std::vector<std::int64_t>& q) {
    for (int j = 0; j < n; ++j) qd[j] = static_cast<double>(q[j]);
    const auto s = multiply(theta, qd);
    for (int i = 0; i < m; ++i) {
      plo[i] = first_member_above(std::floor(bbox.lo[i] - s[i]) - 1.0, v[i], N);
      phi[i] = last_member_below(std::ceil(bbox.hi[i] - s[i]) + 1.0, v[i], N);
    }
    for (int j = 0; j < n; ++j) z[m + j] = qd[j];
    for_each_member(plo, phi, N, [&](const std::vector<std::int64_t>& p) {
      for (int i = 0; i < m; ++i) z[i] = s[i] + static_cast<double>(p[i]);
      if (region.contains(z)) ++total;
    });
  });
  return total;
}

std::uint64_t count_via_scaled_lattice(const ProblemInstance& inst,
                                       const ThetaMatrix& theta, double T) {
  check_theta(inst, theta);
  const std::int64_t N = inst.congruence().modulus();
  const auto Nd = static_cast<double>(N);
  const RegionSpec region = RegionSpec::e_t(inst.region_params(T)).shrunk(Nd);
  const Box bbox = region.bounding_box();
  const int m = inst.m();
  const int n = inst.n();
  const auto& v = inst.congruence().residues();

  // Points are u(theta)(k + v/N) with k in Z^d.
  auto k_range = [&](int axis, double lo, double hi) {
    const double offset = static_cast<double>(v[axis]) / Nd;
    return std::pair<std::int64_t, std::int64_t>(
        static_cast<std::int64_t>(std::floor(lo - offset)) - 1,
        static_cast<std::int64_t>(std::ceil(hi - offset)) + 1);
  };
  std::vector<std::int64_t> klo(n), khi(n);
  for (int j = 0; j < n; ++j) {
    std::tie(klo[j], khi[j]) = k_range(m + j, bbox.lo[m + j], bbox.hi[m + j]);
  }
  std::uint64_t total = 0;
  std::vector<double> z(m + n), y(n);
  std::vector<std::int64_t> plo(m), phi(m);
  for_each_member(klo, khi, 1, [&](const std::vector<std::int64_t>& k) {
    for (int j = 0; j < n; ++j) {
      y[j] = static_cast<double>(k[j]) + static_cast<double>(v[m + j]) / Nd;
    }
    const auto s = multiply(theta, y);
    for (int i = 0; i < m; ++i) {
      std::tie(plo[i], phi[i]) = k_range(i, bbox.lo[i] - s[i], bbox.hi[i] - s[i]);
    }
    for (int j = 0; j < n; ++j) z[m + j] = y[j];
    for_each_member(plo, phi, 1, [&](const std::vector<std::int64_t>& kp) {
      for (int i = 0; i < m; ++i) {
        z[i] = s[i] + (static_cast<double>(kp[i]) + static_cast<double>(v[i]) / Nd);
      }
      if (region.contains(z)) ++total;
    });
  });
  return total;
}

}  // namespace kglab
