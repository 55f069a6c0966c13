#include "kglab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kglab/format.hpp"

namespace kglab {

NormSpec NormSpec::sup(int dim) {
  if (dim < 1) throw std::invalid_argument("norm dimension must be >= 1");
  return NormSpec(NormKind::sup, 0.0, 1.0, dim);
}

NormSpec NormSpec::lp(double p, int dim) {
  if (dim < 1) throw std::invalid_argument("norm dimension must be >= 1");
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("L^p norm requires finite p >= 1");
  }
  return NormSpec(NormKind::lp, p, 1.0, dim);
}

NormSpec NormSpec::scaled(const NormSpec& base, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("norm scale factor must be positive");
  }
  NormSpec out = base;
  out.factor_ = base.factor_ * factor;
  return out;
}

NormSpec NormSpec::parse(std::string_view text, int dim) {
  text = trim(text);
  if (text == "sup") return sup(dim);
  if (text.starts_with("lp:")) return lp(parse_double(text.substr(3)), dim);
  if (text.starts_with("scaled:")) {
    const auto rest = text.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      throw std::invalid_argument("scaled norm needs 'scaled:<factor>:<inner>'");
    }
    return scaled(parse(rest.substr(colon + 1), dim),
                  parse_double(rest.substr(0, colon)));
  }
  throw std::invalid_argument("unknown norm '" + std::string(text) + "'");
}

std::string NormSpec::to_string() const {
  std::string base = kind_ == NormKind::sup ? "sup" : "lp:" + format_double(p_);
  if (factor_ == 1.0) return base;
  return "scaled:" + format_double(factor_) + ":" + base;
}

double NormSpec::kappa_low() const { return factor_; }

double NormSpec::kappa_up() const {
  if (kind_ == NormKind::sup) return factor_;
  return factor_ * std::pow(static_cast<double>(dim_), 1.0 / p_);
}

double NormSpec::base_value(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw std::invalid_argument("norm: expected dimension " +
                                std::to_string(dim_) + ", got " +
                                std::to_string(x.size()));
  }
  if (kind_ == NormKind::sup) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  if (p_ == 1.0) {
    for (double v : x) s += std::abs(v);
    return s;
  }
  if (p_ == 2.0) {
    for (double v : x) s += v * v;
    return std::sqrt(s);
  }
  for (double v : x) s += std::pow(std::abs(v), p_);
  return std::pow(s, 1.0 / p_);
}

double NormSpec::operator()(std::span<const double> x) const {
  return factor_ * base_value(x);
}

double NormSpec::operator()(std::span<const std::int64_t> x) const {
  std::vector<double> v(x.begin(), x.end());
  return (*this)(std::span<const double>(v));
}

double eval_norm(const NormSpec& nu, std::span<const double> x) { return nu(x); }

double ball_volume_constant(const NormSpec& nu) {
  const int l = nu.dim();
  double base;
  if (nu.kind() == NormKind::sup) {
    base = std::ldexp(1.0, l);
  } else {
    const double p = nu.p();
    base = std::ldexp(1.0, l) * std::pow(std::tgamma(1.0 + 1.0 / p), l) /
           std::tgamma(1.0 + l / p);
  }
  return base / std::pow(nu.factor(), l);
}

IntegerMinimum integer_min_norm(const NormSpec& nu) {
  const int l = nu.dim();
  IntegerMinimum best;
  best.minimizer.assign(l, 0);
  best.minimizer[0] = 1;
  best.value = nu(std::span<const std::int64_t>(best.minimizer));

  const auto radius =
      static_cast<std::int64_t>(std::ceil(best.value / nu.kappa_low()));
  std::vector<std::int64_t> w(l, -radius);
  std::vector<double> wd(l);
  while (true) {
    bool zero = true;
    for (int i = 0; i < l; ++i) {
      wd[i] = static_cast<double>(w[i]);
      zero = zero && w[i] == 0;
    }
    if (!zero) {
      const double v = nu(std::span<const double>(wd));
      if (v < best.value) {
        best.value = v;
        best.minimizer = w;
      }
    }
    int i = l - 1;
    while (i >= 0 && w[i] == radius) w[i--] = -radius;
    if (i < 0) break;
    ++w[i];
  }
  return best;
}

NormSpec normalize_for_integers(const NormSpec& nu) {
  return NormSpec::scaled(nu, 1.0 / integer_min_norm(nu).value);
}

double spectral_norm(const RealMatrix& a) {
  const RealMatrix gram = a.transposed() * a;
  const std::size_t n = gram.cols();
  if (n == 0) return 0.0;

  auto rayleigh_from = [&](std::vector<double> v) {
    double lambda = 0.0;
    for (int iter = 0; iter < 20000; ++iter) {
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) return 0.0;
      for (double& x : v) x /= norm;
      const std::vector<double> w = multiply(gram, v);
      double next = 0.0;
      for (std::size_t i = 0; i < n; ++i) next += v[i] * w[i];
      const bool done = std::abs(next - lambda) <= 1e-14 * std::abs(next);
      lambda = next;
      v = w;
      if (done) break;
    }
    return lambda;
  };

  // One start per basis vector: at least one has a component along the top
  // eigenvector, so the max over starts is the top eigenvalue.
  double best = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(n, 0.0);
    v[k] = 1.0;
    best = std::max(best, rayleigh_from(std::move(v)));
  }
  return std::sqrt(best);
}

OperatorNorm operator_norm(const RealMatrix& a, const NormSpec& from,
                           const NormSpec& to) {
  if (static_cast<int>(a.cols()) != from.dim() ||
      static_cast<int>(a.rows()) != to.dim()) {
    throw std::invalid_argument("operator_norm: dimension mismatch");
  }
  const double ratio = to.factor() / from.factor();
  const double sup_sup = max_abs_row_sum(a);
  const double comparison = to.kappa_up() / from.kappa_low() * sup_sup;

  if (from.kind() == NormKind::sup && to.kind() == NormKind::sup) {
    return {ratio * sup_sup, true};
  }
  if (from.kind() == NormKind::lp && to.kind() == NormKind::lp &&
      from.p() == to.p()) {
    const double p = from.p();
    if (p == 2.0) return {ratio * spectral_norm(a), true};
    if (p == 1.0) return {ratio * max_abs_column_sum(a), true};
    // Riesz-Thorin interpolation between the L^1 and L^inf operator norms.
    const double rt = ratio * std::pow(max_abs_column_sum(a), 1.0 / p) *
                      std::pow(sup_sup, 1.0 - 1.0 / p);
    return {std::min(rt, comparison), false};
  }
  return {comparison, false};
}

}  // namespace kglab
