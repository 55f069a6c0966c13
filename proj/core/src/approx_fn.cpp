#include "kglab/approx_fn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "kglab/format.hpp"

namespace kglab {

std::string_view to_string(Divergence d) {
  switch (d) {
    case Divergence::divergent: return "divergent";
    case Divergence::convergent: return "convergent";
    case Divergence::unknown: return "unknown";
  }
  return "unknown";
}

namespace {

void require_positive(double c, const char* what) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument(std::string(what) + ": coefficient must be > 0");
  }
}

void require_exponent(double s, const char* what) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument(std::string(what) + ": exponent must be >= 0");
  }
}

// Neumaier's variant of Kahan summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

ApproxFunction ApproxFunction::power(double c, double s) {
  require_positive(c, "pow");
  require_exponent(s, "pow");
  ApproxFunction f;
  f.family_ = PsiFamily::power;
  f.c_ = c;
  f.s_ = s;
  return f;
}

ApproxFunction ApproxFunction::power_log(double c, double s) {
  require_positive(c, "powlog");
  require_exponent(s, "powlog");
  ApproxFunction f;
  f.family_ = PsiFamily::power_log;
  f.c_ = c;
  f.s_ = s;
  return f;
}

ApproxFunction ApproxFunction::constant(double c) {
  require_positive(c, "const");
  ApproxFunction f;
  f.family_ = PsiFamily::constant;
  f.c_ = c;
  return f;
}

ApproxFunction ApproxFunction::table(std::vector<Knot> knots,
                                     std::string source) {
  if (knots.empty()) throw std::invalid_argument("table: no knots");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto [t, v] = knots[i];
    if (!std::isfinite(t) || !(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("table: knots need finite t and value > 0");
    }
    if (i > 0 && !(t > knots[i - 1].first)) {
      throw std::invalid_argument("table: knot abscissae must increase");
    }
  }
  ApproxFunction f;
  f.family_ = PsiFamily::table;
  f.knots_ = std::make_shared<const std::vector<Knot>>(std::move(knots));
  f.source_ = std::move(source);
  return f;
}

ApproxFunction ApproxFunction::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("table: cannot open '" + path + "'");
  std::vector<Knot> knots;
  std::string line;
  while (std::getline(in, line)) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto fields = split(body, ',');
    if (fields.size() != 2) {
      throw std::invalid_argument("table: expected two columns in '" +
                                  std::string(body) + "'");
    }
    double t, v;
    try {
      t = parse_double(fields[0]);
      v = parse_double(fields[1]);
    } catch (const std::invalid_argument&) {
      if (knots.empty()) continue;  // header row
      throw;
    }
    knots.emplace_back(t, v);
  }
  return table(std::move(knots), path);
}

ApproxFunction ApproxFunction::parse(std::string_view text) {
  text = trim(text);
  const auto parts = split(text, ':');
  const auto& tag = parts.front();
  if (tag == "pow" && parts.size() == 3) {
    return power(parse_double(parts[1]), parse_double(parts[2]));
  }
  if (tag == "powlog" && parts.size() == 3) {
    return power_log(parse_double(parts[1]), parse_double(parts[2]));
  }
  if (tag == "const" && parts.size() == 2) return constant(parse_double(parts[1]));
  if (tag == "table" && text.size() > 6) {
    return from_csv(std::string(text.substr(6)));
  }
  throw std::invalid_argument("unknown approximating function '" +
                              std::string(text) + "'");
}

std::string ApproxFunction::to_string() const {
  switch (family_) {
    case PsiFamily::power:
      return "pow:" + format_double(c_) + ":" + format_double(s_);
    case PsiFamily::power_log:
      return "powlog:" + format_double(c_) + ":" + format_double(s_);
    case PsiFamily::constant:
      return "const:" + format_double(c_);
    case PsiFamily::table:
      return "table:" + (source_.empty() ? std::string("<inline>") : source_);
  }
  return {};
}

const std::vector<ApproxFunction::Knot>& ApproxFunction::knots() const {
  static const std::vector<Knot> none;
  return knots_ ? *knots_ : none;
}

double ApproxFunction::value(double t) const {
  switch (family_) {
    case PsiFamily::power:
      return s_ == 0.0 ? c_ : c_ * std::pow(t, -s_);
    case PsiFamily::power_log:
      return c_ / (t * std::pow(1.0 + std::log(t), s_));
    case PsiFamily::constant:
      return c_;
    case PsiFamily::table: {
      const auto& k = *knots_;
      if (t <= k.front().first) return k.front().second;
      if (t >= k.back().first) return k.back().second;
      const auto hi = std::upper_bound(
          k.begin(), k.end(), t,
          [](double x, const Knot& knot) { return x < knot.first; });
      const auto lo = hi - 1;
      const double w = (t - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    }
  }
  return 0.0;
}

double ApproxFunction::operator()(double t) const {
  if (!(t >= 1.0)) throw std::domain_error("psi is defined on [1, inf)");
  return value(t);
}

double ApproxFunction::antiderivative(double t) const {
  // An antiderivative G with G(1) = 0 for the closed-form families.
  switch (family_) {
    case PsiFamily::power:
      if (s_ == 1.0) return c_ * std::log(t);
      return c_ * (std::pow(t, 1.0 - s_) - 1.0) / (1.0 - s_);
    case PsiFamily::power_log: {
      const double u = 1.0 + std::log(t);  // substitution u = log(e t)
      if (s_ == 1.0) return c_ * std::log(u);
      return c_ * (std::pow(u, 1.0 - s_) - 1.0) / (1.0 - s_);
    }
    case PsiFamily::constant:
      return c_ * (t - 1.0);
    case PsiFamily::table: {
      const auto& k = *knots_;
      double area = 0.0;
      double x = 1.0;
      double fx = value(1.0);
      // Breakpoints of the piecewise-linear interpolant above 1.
      for (const auto& [kt, kv] : k) {
        if (kt <= x) continue;
        if (kt >= t) break;
        area += 0.5 * (fx + kv) * (kt - x);
        x = kt;
        fx = kv;
      }
      area += 0.5 * (fx + value(t)) * (t - x);
      return area;
    }
  }
  return 0.0;
}

double ApproxFunction::integral(double a, double b) const {
  if (!(a >= 1.0) || !(b >= a)) {
    throw std::domain_error("psi integral needs 1 <= a <= b");
  }
  return antiderivative(b) - antiderivative(a);
}

Divergence ApproxFunction::divergence() const {
  switch (family_) {
    case PsiFamily::power:
    case PsiFamily::power_log:
      return s_ <= 1.0 ? Divergence::divergent : Divergence::convergent;
    case PsiFamily::constant:
      return Divergence::divergent;
    case PsiFamily::table:
      return Divergence::unknown;
  }
  return Divergence::unknown;
}

double eval_psi(const ApproxFunction& psi, double t) { return psi(t); }

double partial_sum(const ApproxFunction& psi, double T) {
  const double grid[] = {T};
  return partial_sums(psi, grid).front();
}

std::vector<double> partial_sums(const ApproxFunction& psi,
                                 std::span<const double> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  CompensatedSum acc;
  double t = 1.0;
  for (double T : grid) {
    if (!(T >= 1.0) || !std::isfinite(T)) {
      throw std::domain_error("partial_sum needs finite T >= 1");
    }
    if (!out.empty() && T < grid[out.size() - 1]) {
      throw std::invalid_argument("partial_sums: grid must be increasing");
    }
    for (; t < T; t += 1.0) acc.add(psi(t));
    out.push_back(acc.value());
  }
  return out;
}

double integral_psi(const ApproxFunction& psi, double T) {
  return psi.integral(1.0, T);
}

AdmissibilityReport check_admissible(const ApproxFunction& psi) {
  constexpr int kPoints = 1000;
  AdmissibilityReport report{true, true, psi.divergence()};
  double prev = psi(1.0);
  report.positive = prev > 0.0;
  for (int k = 1; k < kPoints; ++k) {
    const double t = std::pow(10.0, 6.0 * k / (kPoints - 1));
    const double v = psi(t);
    report.positive = report.positive && v > 0.0;
    report.nonincreasing = report.nonincreasing && v <= prev;
    prev = v;
  }
  return report;
}

}  // namespace kglab
