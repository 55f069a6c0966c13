#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kglab {

enum class PsiFamily { power, power_log, constant, table };

enum class Divergence { divergent, convergent, unknown };

std::string_view to_string(Divergence d);

// A positive non-increasing function on [1, inf).
//   power(c, s):     c t^-s
//   power_log(c, s): c / (t log(e t)^s)
//   constant(c):     c
//   table(knots):    linear interpolation, constant outside the knot range
class ApproxFunction {
 public:
  using Knot = std::pair<double, double>;

  static ApproxFunction power(double c, double s);
  static ApproxFunction power_log(double c, double s);
  static ApproxFunction constant(double c);
  static ApproxFunction table(std::vector<Knot> knots, std::string source = {});

  // "pow:<c>:<s>", "powlog:<c>:<s>", "const:<c>", "table:<csv path>".
  static ApproxFunction parse(std::string_view text);
  static ApproxFunction from_csv(const std::string& path);
  std::string to_string() const;

  PsiFamily family() const { return family_; }
  double coefficient() const { return c_; }
  double exponent() const { return s_; }
  const std::vector<Knot>& knots() const;

  // Throws std::domain_error for t < 1.
  double operator()(double t) const;

  // Integral of psi over [a, b], 1 <= a <= b.
  double integral(double a, double b) const;

  // Analytic divergence of sum psi(t); tables report unknown.
  Divergence divergence() const;

 private:
  double value(double t) const;
  double antiderivative(double t) const;

  PsiFamily family_ = PsiFamily::constant;
  double c_ = 1.0;
  double s_ = 0.0;
  std::shared_ptr<const std::vector<Knot>> knots_;
  std::string source_;
};

double eval_psi(const ApproxFunction& psi, double t);

// sum of psi(t) over integers 1 <= t < T, with Neumaier compensation.
double partial_sum(const ApproxFunction& psi, double T);

// partial_sum at every point of an increasing grid, in one pass.  Each entry
// is bit-identical to partial_sum(psi, grid[i]).
std::vector<double> partial_sums(const ApproxFunction& psi,
                                 std::span<const double> grid);

// Integral of psi over [1, T].
double integral_psi(const ApproxFunction& psi, double T);

struct AdmissibilityReport {
  bool positive = false;
  bool nonincreasing = false;
  Divergence divergent = Divergence::unknown;
};

// Grid check on 1000 geometrically spaced points of [1, 1e6].
AdmissibilityReport check_admissible(const ApproxFunction& psi);

}  // namespace kglab
