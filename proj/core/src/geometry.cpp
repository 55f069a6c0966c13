#include "kglab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kglab/format.hpp"
#include "kglab/random.hpp"

namespace kglab {

namespace {

constexpr double kInnerT = 1.5;   // lower t-limit of E_minus and E_prime
constexpr double kCoreLow = 0.5;  // C0: 1/2 < t <= 3/2

void validate(const RegionParams& p) {
  if (p.m < 1 || p.n < 1) throw std::invalid_argument("region: m, n must be >= 1");
  if (p.nu1.dim() != p.m || p.nu2.dim() != p.n) {
    throw std::invalid_argument("region: norm dimensions must match m and n");
  }
  if (!(p.T > 1.0) || !std::isfinite(p.T)) {
    throw std::invalid_argument("region: T must be finite and > 1");
  }
}

void validate_eps(double eps) {
  // psi((1+e)^-1 t) with t >= 3/2 stays inside [1, inf) only for e <= 1/2.
  if (!(eps > 0.0 && eps < 0.5)) {
    throw std::domain_error("eps must lie in (0, 1/2)");
  }
}

}  // namespace

RegionSpec RegionSpec::e_t(const RegionParams& params) {
  validate(params);
  RegionSpec r;
  r.kind_ = RegionKind::e_t;
  r.params_ = params;
  return r;
}

RegionSpec RegionSpec::e_minus(const RegionParams& params, double eps) {
  validate(params);
  validate_eps(eps);
  RegionSpec r;
  r.kind_ = RegionKind::e_minus;
  r.params_ = params;
  r.eps_ = eps;
  return r;
}

RegionSpec RegionSpec::e_prime(const RegionParams& params, double eps) {
  RegionSpec r = e_minus(params, eps);
  r.kind_ = RegionKind::e_prime;
  return r;
}

RegionSpec RegionSpec::c0(const RegionParams& params) {
  RegionSpec r = e_t(params);
  r.kind_ = RegionKind::c0;
  return r;
}

RegionSpec RegionSpec::e_plus(const RegionParams& params, double eps) {
  RegionSpec r = e_minus(params, eps);
  r.kind_ = RegionKind::e_plus;
  return r;
}

RegionSpec RegionSpec::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size()) {
    throw std::invalid_argument("box: lo and hi must be nonempty and equal size");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i]) {
      throw std::invalid_argument("box: need finite lo <= hi on every axis");
    }
  }
  RegionSpec r;
  r.kind_ = RegionKind::box;
  r.box_ = {std::move(lo), std::move(hi)};
  return r;
}

RegionSpec RegionSpec::parse(std::string_view text,
                             const std::optional<RegionParams>& params) {
  text = trim(text);
  if (text.starts_with("box:")) {
    std::vector<double> lo, hi;
    for (const auto& axis : split(text.substr(4), ';')) {
      const auto ends = split(axis, ',');
      if (ends.size() != 2) {
        throw std::invalid_argument("box axis must be '<lo>,<hi>'");
      }
      lo.push_back(parse_double(ends[0]));
      hi.push_back(parse_double(ends[1]));
    }
    return box(std::move(lo), std::move(hi));
  }
  if (!params) {
    throw std::invalid_argument("region '" + std::string(text) +
                                "' needs instance parameters");
  }
  if (text == "ET") return e_t(*params);
  if (text == "C0") return c0(*params);
  if (text.starts_with("Eminus:")) return e_minus(*params, parse_double(text.substr(7)));
  if (text.starts_with("Eprime:")) return e_prime(*params, parse_double(text.substr(7)));
  if (text.starts_with("Eplus:")) return e_plus(*params, parse_double(text.substr(6)));
  throw std::invalid_argument("unknown region '" + std::string(text) + "'");
}

int RegionSpec::dim() const {
  return params_ ? params_->dim() : static_cast<int>(box_.lo.size());
}

RegionSpec RegionSpec::shrunk(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("shrink factor must be > 0");
  RegionSpec r = *this;
  r.shrink_ *= factor;
  return r;
}

double RegionSpec::profile(double t) const {
  if (!params_) throw std::logic_error("profile: not an E-family region");
  const auto& p = *params_;
  const double up = 1.0 + eps_;
  switch (kind_) {
    case RegionKind::e_t:
      return (t >= 1.0 && t < p.T) ? p.psi(t) : 0.0;
    case RegionKind::e_minus:
      return (t >= kInnerT && t < p.T / up) ? p.psi(up * t) / up : 0.0;
    case RegionKind::e_prime:
      return (t >= kInnerT && t < up * p.T) ? up * p.psi(t / up) : 0.0;
    case RegionKind::c0:
      return (t > kCoreLow && t <= kInnerT) ? 2.0 * p.psi(1.0) : 0.0;
    case RegionKind::e_plus: {
      const double core = (t > kCoreLow && t <= kInnerT) ? 2.0 * p.psi(1.0) : 0.0;
      const double outer = (t >= kInnerT && t < up * p.T) ? up * p.psi(t / up) : 0.0;
      return std::max(core, outer);
    }
    case RegionKind::box:
      break;
  }
  throw std::logic_error("profile: not an E-family region");
}

double RegionSpec::profile_max() const {
  const auto& p = *params_;
  const double up = 1.0 + eps_;
  switch (kind_) {
    case RegionKind::e_t: return p.psi(1.0);
    case RegionKind::e_minus: return p.psi(up * kInnerT) / up;
    case RegionKind::e_prime: return up * p.psi(kInnerT / up);
    case RegionKind::c0: return 2.0 * p.psi(1.0);
    case RegionKind::e_plus:
      return std::max(2.0 * p.psi(1.0), up * p.psi(kInnerT / up));
    case RegionKind::box: break;
  }
  throw std::logic_error("profile_max: not an E-family region");
}

double RegionSpec::t_max() const {
  const auto& p = *params_;
  const double up = 1.0 + eps_;
  switch (kind_) {
    case RegionKind::e_t: return p.T;
    case RegionKind::e_minus: return p.T / up;
    case RegionKind::e_prime:
    case RegionKind::e_plus: return up * p.T;
    case RegionKind::c0: return kInnerT;
    case RegionKind::box: break;
  }
  throw std::logic_error("t_max: not an E-family region");
}

bool RegionSpec::contains_unshrunk(std::span<const double> z) const {
  if (kind_ == RegionKind::box) {
    for (std::size_t i = 0; i < z.size(); ++i)
      if (!(z[i] >= box_.lo[i] && z[i] < box_.hi[i])) return false;
    return true;
  }
  const auto& p = *params_;
  const double t = ipow(p.nu2(z.subspan(p.m)), p.n);
  const double a = ipow(p.nu1(z.first(p.m)), p.m);
  return a < profile(t);
}

bool RegionSpec::contains(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim()) {
    throw std::invalid_argument("contains: point has dimension " +
                                std::to_string(z.size()) + ", region has " +
                                std::to_string(dim()));
  }
  if (shrink_ == 1.0) return contains_unshrunk(z);
  std::vector<double> scaled(z.begin(), z.end());
  for (double& v : scaled) v *= shrink_;
  return contains_unshrunk(scaled);
}

double RegionSpec::volume() const {
  double base = 0.0;
  if (kind_ == RegionKind::box) {
    base = 1.0;
    for (std::size_t i = 0; i < box_.lo.size(); ++i) base *= box_.hi[i] - box_.lo[i];
  } else {
    const auto& p = *params_;
    const double cc = ball_volume_constant(p.nu1) * ball_volume_constant(p.nu2);
    const double up = 1.0 + eps_;
    // With t = nu2(y)^n the y-measure is c_nu2 dt, so every E-region has
    // volume c1 c2 * integral of its profile over t.
    auto e_prime_volume = [&] {
      const double lo = kInnerT / up;
      return lo < p.T ? up * up * cc * p.psi.integral(lo, p.T) : 0.0;
    };
    auto c0_volume = [&] { return 2.0 * p.psi(1.0) * cc * (kInnerT - kCoreLow); };
    switch (kind_) {
      case RegionKind::e_t:
        base = cc * integral_psi(p.psi, p.T);
        break;
      case RegionKind::e_minus: {
        const double lo = kInnerT * up;
        base = lo < p.T ? cc / (up * up) * p.psi.integral(lo, p.T) : 0.0;
        break;
      }
      case RegionKind::e_prime:
        base = e_prime_volume();
        break;
      case RegionKind::c0:
        base = c0_volume();
        break;
      case RegionKind::e_plus:
        // E_prime needs t >= 3/2 and C0 needs t <= 3/2: the overlap lies in
        // the null set t = 3/2.
        base = e_prime_volume() + c0_volume();
        break;
      case RegionKind::box:
        break;
    }
  }
  return base / std::pow(shrink_, dim());
}

double region_volume(const RegionSpec& region) { return region.volume(); }

Box RegionSpec::bounding_box() const {
  Box out;
  if (kind_ == RegionKind::box) {
    out = box_;
  } else {
    const auto& p = *params_;
    const double xr = std::pow(profile_max(), 1.0 / p.m) / p.nu1.kappa_low();
    const double yr = std::pow(t_max(), 1.0 / p.n) / p.nu2.kappa_low();
    for (int i = 0; i < p.m; ++i) {
      out.lo.push_back(-xr);
      out.hi.push_back(xr);
    }
    for (int i = 0; i < p.n; ++i) {
      out.lo.push_back(-yr);
      out.hi.push_back(yr);
    }
  }
  for (auto& v : out.lo) v /= shrink_;
  for (auto& v : out.hi) v /= shrink_;
  return out;
}

SampleResult sample_region(const RegionSpec& region, std::uint64_t seed,
                           std::size_t count) {
  constexpr std::uint64_t kCheckEvery = 1'000'000;
  constexpr double kMinAcceptance = 1e-6;

  Rng rng(seed);
  SampleResult out;
  out.points.reserve(count);
  const int d = region.dim();
  const Box bbox = region.bounding_box();

  auto check_degenerate = [&] {
    if (out.attempts % kCheckEvery == 0 &&
        out.acceptance_rate() < kMinAcceptance) {
      throw std::runtime_error("sample_region: acceptance rate " +
                               format_double(out.acceptance_rate()) +
                               " below 1e-6 (degenerate region)");
    }
  };

  if (!region.is_e_family()) {
    std::vector<double> z(d);
    while (out.accepted < count) {
      for (int i = 0; i < d; ++i) z[i] = rng.uniform(bbox.lo[i], bbox.hi[i]);
      ++out.attempts;
      if (region.contains(z)) {
        out.points.push_back(z);
        ++out.accepted;
      }
      check_degenerate();
    }
    return out;
  }

  const auto& p = region.params();
  const double shrink = region.shrink_factor();
  const double amax = region.profile_max();
  const double yr = std::pow(region.t_max(), 1.0 / p.n) / p.nu2.kappa_low();
  std::vector<double> x(p.m), y(p.n), z(d);
  while (out.accepted < count) {
    for (int i = 0; i < p.n; ++i) y[i] = rng.uniform(-yr, yr);
    ++out.attempts;
    const double a = region.profile(ipow(p.nu2(y), p.n));
    const bool keep = a > 0.0 && rng.uniform() * amax < a;
    if (keep) {
      // x uniform in {nu1(x)^m < a}.
      const double xr = std::pow(a, 1.0 / p.m) / p.nu1.kappa_low();
      do {
        for (int i = 0; i < p.m; ++i) x[i] = rng.uniform(-xr, xr);
      } while (!(ipow(p.nu1(x), p.m) < a));
      std::copy(x.begin(), x.end(), z.begin());
      std::copy(y.begin(), y.end(), z.begin() + p.m);
      if (shrink != 1.0)
        for (double& v : z) v /= shrink;
      out.points.push_back(z);
      ++out.accepted;
    }
    check_degenerate();
  }
  return out;
}

bool admissible_epsilon(double eps, int n) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::domain_error("eps must lie in (0, 1/2)");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const double inv_n = 1.0 / n;
  const double slack = eps / (4.0 * n);
  const bool upper = std::pow(1.0 + eps / 2.0, inv_n) + slack < std::pow(1.0 + eps, inv_n);
  const bool lower = std::pow(1.0 + eps / 2.0, -inv_n) - slack > std::pow(2.0, -inv_n);
  return upper && lower;
}

PerturbationElement::PerturbationElement(RealMatrix alpha, RealMatrix beta,
                                         RealMatrix gamma)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), gamma_(std::move(gamma)) {
  if (alpha_.rows() != alpha_.cols() || gamma_.rows() != gamma_.cols() ||
      beta_.rows() != gamma_.rows() || beta_.cols() != alpha_.rows() ||
      alpha_.empty() || gamma_.empty()) {
    throw std::invalid_argument("PerturbationElement: inconsistent block shapes");
  }
  const double det = determinant(alpha_) * determinant(gamma_);
  if (!(std::abs(det - 1.0) <= 1e-10)) {
    throw std::invalid_argument("PerturbationElement: det(h) = " +
                                format_double(det) + ", expected 1");
  }
}

PerturbationElement PerturbationElement::identity(int m, int n) {
  return {RealMatrix::identity(m), RealMatrix(n, m), RealMatrix::identity(n)};
}

std::vector<double> PerturbationElement::apply(std::span<const double> z) const {
  const std::size_t m = alpha_.rows();
  const std::size_t n = gamma_.rows();
  if (z.size() != m + n) throw std::invalid_argument("apply: dimension mismatch");
  const auto x = z.first(m);
  const auto y = z.subspan(m);
  const auto ax = multiply(alpha_, x);
  const auto bx = multiply(beta_, x);
  const auto gy = multiply(gamma_, y);
  std::vector<double> out(ax);
  for (std::size_t i = 0; i < n; ++i) out.push_back(bx[i] + gy[i]);
  return out;
}

PerturbationElement PerturbationElement::inverse() const {
  RealMatrix ai = kglab::inverse(alpha_);
  RealMatrix gi = kglab::inverse(gamma_);
  RealMatrix bi = -(gi * beta_ * ai);
  return {std::move(ai), std::move(bi), std::move(gi)};
}

RealMatrix PerturbationElement::full_matrix() const {
  const std::size_t m = alpha_.rows();
  const std::size_t n = gamma_.rows();
  RealMatrix h(m + n, m + n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) h(i, j) = alpha_(i, j);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) h(m + i, j) = beta_(i, j);
    for (std::size_t j = 0; j < n; ++j) h(m + i, m + j) = gamma_(i, j);
  }
  return h;
}

namespace {

double beta_limit(double eps, const RegionParams& params) {
  return eps / (4.0 * params.n * std::pow(params.psi(1.0), 1.0 / params.m));
}

}  // namespace

HMembership h_tilde_membership(const PerturbationElement& h, double eps,
                               const RegionParams& params) {
  if (h.m() != params.m || h.n() != params.n) {
    throw std::invalid_argument("h_tilde_membership: block sizes do not match m, n");
  }
  HMembership r;
  r.alpha = operator_norm(h.alpha(), params.nu1, params.nu1);
  r.gamma = operator_norm(h.gamma(), params.nu2, params.nu2);
  r.beta = operator_norm(h.beta(), params.nu1, params.nu2);
  r.block_limit = 1.0 + eps / 2.0;
  r.beta_limit = beta_limit(eps, params);
  r.inside = ipow(r.alpha.value, params.m) < r.block_limit &&
             ipow(r.gamma.value, params.n) < r.block_limit &&
             r.beta.value < r.beta_limit;
  return r;
}

bool in_h_eps(const PerturbationElement& h, double eps,
              const RegionParams& params) {
  return h_tilde_membership(h, eps, params).inside &&
         h_tilde_membership(h.inverse(), eps, params).inside;
}

PerturbationElement sample_h_eps(double eps, const RegionParams& params,
                                 std::uint64_t seed,
                                 const PerturbationOptions& options) {
  validate(params);
  if (!admissible_epsilon(eps, params.n)) {
    throw std::domain_error("sample_h_eps: eps is not admissible");
  }
  const int m = params.m;
  const int n = params.n;
  const double default_scale = eps / (8.0 * (m + n));
  const double scale = options.scale.value_or(default_scale);
  if (!(scale >= 0.0)) throw std::invalid_argument("perturbation scale must be >= 0");
  const double limit = beta_limit(eps, params);

  Rng rng(seed);
  auto random_block = [&](int rows, int cols) {
    RealMatrix b(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) b(i, j) = rng.uniform(-1.0, 1.0);
    return b;
  };

  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    RealMatrix alpha = RealMatrix::identity(m) + scale * random_block(m, m);
    RealMatrix gamma = RealMatrix::identity(n) + scale * random_block(n, n);
    const double det = determinant(alpha) * determinant(gamma);
    if (!(det > 0.0)) continue;
    gamma = std::pow(det, -1.0 / n) * gamma;

    RealMatrix beta(n, m);
    if (scale > 0.0) {
      const RealMatrix dir = random_block(n, m);
      const double size = operator_norm(dir, params.nu1, params.nu2).value;
      if (size > 0.0) {
        beta = (scale / default_scale) * rng.uniform() * limit / size * dir;
      }
    }
    PerturbationElement h(std::move(alpha), std::move(beta), std::move(gamma));
    if (in_h_eps(h, eps, params)) return h;
  }
  throw std::runtime_error("sample_h_eps: rejection budget of " +
                           std::to_string(options.max_attempts) +
                           " attempts exhausted");
}

PerturbationElement make_shear(double eps, const RegionParams& params,
                               double factor) {
  validate(params);
  RealMatrix beta(params.n, params.m, 1.0);
  const double size = operator_norm(beta, params.nu1, params.nu2).value;
  beta = factor * beta_limit(eps, params) / size * beta;
  return {RealMatrix::identity(params.m), std::move(beta),
          RealMatrix::identity(params.n)};
}

SandwichReport sandwich_check(const PerturbationElement& h,
                              const RegionParams& params, double eps,
                              std::size_t samples, std::uint64_t seed) {
  validate(params);
  if (!(params.T > 10.0)) throw std::domain_error("sandwich_check needs T > 10");
  if (!admissible_epsilon(eps, params.n)) {
    throw std::domain_error("sandwich_check: eps is not admissible");
  }
  constexpr std::size_t kMaxWitnesses = 16;
  const RegionSpec e_t = RegionSpec::e_t(params);
  const RegionSpec e_minus = RegionSpec::e_minus(params, eps);
  const RegionSpec e_plus = RegionSpec::e_plus(params, eps);
  const PerturbationElement h_inv = h.inverse();

  SandwichReport report;
  auto record = [&](const std::vector<double>& z) {
    if (report.witnesses.size() < kMaxWitnesses) report.witnesses.push_back(z);
  };

  for (const auto& z : sample_region(e_t, derive_seed(seed, 0), samples).points) {
    ++report.forward_checked;
    if (!e_plus.contains(h.apply(z))) {
      ++report.forward_violations;
      record(z);
    }
  }
  if (e_minus.volume() > 0.0) {
    for (const auto& z :
         sample_region(e_minus, derive_seed(seed, 1), samples).points) {
      ++report.backward_checked;
      if (!e_t.contains(h_inv.apply(z))) {
        ++report.backward_violations;
        record(z);
      }
    }
  }
  return report;
}

}  // namespace kglab
