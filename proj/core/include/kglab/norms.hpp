#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kglab/matrix.hpp"

namespace kglab {

enum class NormKind { sup, lp };

// A norm on R^dim: the sup norm or an L^p norm (p >= 1), times a positive
// factor.  Nested scalings collapse into a single factor, so
// scaled(scaled(sup, 2), 0.5) is the sup norm again.
class NormSpec {
 public:
  static NormSpec sup(int dim);
  static NormSpec lp(double p, int dim);
  static NormSpec scaled(const NormSpec& base, double factor);

  // "sup", "lp:<p>", "scaled:<factor>:<inner>".
  static NormSpec parse(std::string_view text, int dim);
  std::string to_string() const;

  NormKind kind() const { return kind_; }
  double p() const { return p_; }
  double factor() const { return factor_; }
  int dim() const { return dim_; }
  bool is_scaled() const { return factor_ != 1.0; }
  bool is_sup_family() const { return kind_ == NormKind::sup; }

  // kappa_low * |x|_inf <= nu(x) <= kappa_up * |x|_inf.
  double kappa_low() const;
  double kappa_up() const;

  // Throws std::invalid_argument on dimension mismatch.
  double operator()(std::span<const double> x) const;
  double operator()(std::span<const std::int64_t> x) const;

  friend bool operator==(const NormSpec&, const NormSpec&) = default;

 private:
  NormSpec(NormKind kind, double p, double factor, int dim)
      : kind_(kind), p_(p), factor_(factor), dim_(dim) {}

  double base_value(std::span<const double> x) const;

  NormKind kind_ = NormKind::sup;
  double p_ = 0.0;
  double factor_ = 1.0;
  int dim_ = 1;
};

double eval_norm(const NormSpec& nu, std::span<const double> x);

// Volume of the open unit ball {x : nu(x) < 1}.
double ball_volume_constant(const NormSpec& nu);

struct IntegerMinimum {
  double value = 0.0;
  std::vector<std::int64_t> minimizer;
};

// Minimum of nu over nonzero integer vectors, by a box search whose radius is
// justified by nu(w) >= kappa_low |w|_inf.
IntegerMinimum integer_min_norm(const NormSpec& nu);

// Rescales nu so that its minimum over nonzero integer vectors is exactly 1.
NormSpec normalize_for_integers(const NormSpec& nu);

struct OperatorNorm {
  double value = 0.0;
  bool exact = false;  // false: certified upper bound
};

// sup over nu_from(x) = 1 of nu_to(A x), for A of shape to.dim x from.dim.
OperatorNorm operator_norm(const RealMatrix& a, const NormSpec& from,
                           const NormSpec& to);

// Largest singular value via power iteration on A^T A.
double spectral_norm(const RealMatrix& a);

// x^k by repeated multiplication; monotone in x >= 0, which the counting code
// relies on for bit-exact agreement between its code paths.
inline double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace kglab
