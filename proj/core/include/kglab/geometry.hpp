#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kglab/approx_fn.hpp"
#include "kglab/matrix.hpp"
#include "kglab/norms.hpp"

namespace kglab {

// Shared parameters of the E-family regions in R^m x R^n.  nu2 is expected
// to be normalized (integer minimum 1); nu1 is used as given.
struct RegionParams {
  int m = 1;
  int n = 1;
  NormSpec nu1 = NormSpec::sup(1);
  NormSpec nu2 = NormSpec::sup(1);
  ApproxFunction psi = ApproxFunction::constant(1.0);
  double T = 2.0;

  int dim() const { return m + n; }
};

enum class RegionKind { e_t, e_minus, e_prime, c0, e_plus, box };

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

// Points are (x, y) with x in R^m, y in R^n, t = nu2(y)^n and a = nu1(x)^m.
//   E_T        a < psi(t),                 1 <= t < T
//   E_minus    a < psi((1+e)t)/(1+e),      3/2 <= t < T/(1+e)
//   E_prime    a < (1+e) psi(t/(1+e)),     3/2 <= t < (1+e)T
//   C0         a < 2 psi(1),               1/2 < t <= 3/2
//   E_plus     E_prime union C0
//   box        lo_i <= z_i < hi_i
class RegionSpec {
 public:
  static RegionSpec e_t(const RegionParams& params);
  static RegionSpec e_minus(const RegionParams& params, double eps);
  static RegionSpec e_prime(const RegionParams& params, double eps);
  static RegionSpec c0(const RegionParams& params);
  static RegionSpec e_plus(const RegionParams& params, double eps);
  static RegionSpec box(std::vector<double> lo, std::vector<double> hi);

  // "ET", "Eminus:<eps>", "Eprime:<eps>", "Eplus:<eps>", "C0",
  // "box:<lo1>,<hi1>;<lo2>,<hi2>;...".
  static RegionSpec parse(std::string_view text,
                          const std::optional<RegionParams>& params);

  RegionKind kind() const { return kind_; }
  int dim() const;
  double eps() const { return eps_; }
  const RegionParams& params() const { return *params_; }
  bool is_e_family() const { return kind_ != RegionKind::box; }

  // The region {z : factor * z in this}.  Used for the N^-1 E_T rescaling.
  RegionSpec shrunk(double factor) const;
  double shrink_factor() const { return shrink_; }

  // Upper bound on nu1(x)^m as a function of t = nu2(y)^n; zero where the
  // y-condition fails.  E-family only.
  double profile(double t) const;
  double profile_max() const;
  double t_max() const;

  bool contains(std::span<const double> z) const;

  // Closed-form Lebesgue measure.
  double volume() const;

  Box bounding_box() const;

 private:
  RegionSpec() = default;
  bool contains_unshrunk(std::span<const double> z) const;

  RegionKind kind_ = RegionKind::box;
  std::optional<RegionParams> params_;
  double eps_ = 0.0;
  double shrink_ = 1.0;
  Box box_;
};

double region_volume(const RegionSpec& region);

struct SampleResult {
  std::vector<std::vector<double>> points;
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;
  double acceptance_rate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(accepted) / attempts;
  }
};

// Uniform points by rejection from the bounding box.  E-family regions use a
// two-stage rejection (y first, weighted by profile(t), then x inside the
// nu1-ball), which is exactly uniform and avoids drawing x for rejected y.
// Throws std::runtime_error when acceptance stays below 1e-6.
SampleResult sample_region(const RegionSpec& region, std::uint64_t seed,
                           std::size_t count);

// The two scalar inequalities that make the perturbation lemma go through:
//   (1+e/2)^(1/n) + e/(4n) < (1+e)^(1/n)
//   (1+e/2)^(-1/n) - e/(4n) > 2^(-1/n)
// Throws std::domain_error unless 0 < eps < 1/2.
bool admissible_epsilon(double eps, int n);

// h = [[alpha, 0], [beta, gamma]] acting on (x, y) as (alpha x, beta x + gamma y).
class PerturbationElement {
 public:
  PerturbationElement(RealMatrix alpha, RealMatrix beta, RealMatrix gamma);

  static PerturbationElement identity(int m, int n);

  const RealMatrix& alpha() const { return alpha_; }
  const RealMatrix& beta() const { return beta_; }
  const RealMatrix& gamma() const { return gamma_; }
  int m() const { return static_cast<int>(alpha_.rows()); }
  int n() const { return static_cast<int>(gamma_.rows()); }

  std::vector<double> apply(std::span<const double> z) const;
  PerturbationElement inverse() const;
  RealMatrix full_matrix() const;

 private:
  RealMatrix alpha_;
  RealMatrix beta_;
  RealMatrix gamma_;
};

struct HMembership {
  OperatorNorm alpha;  // nu1 -> nu1
  OperatorNorm gamma;  // nu2 -> nu2
  OperatorNorm beta;   // nu1 -> nu2
  double block_limit = 0.0;  // 1 + eps/2
  double beta_limit = 0.0;   // eps / (4 n psi(1)^(1/m))
  bool inside = false;
};

// Membership of h in the tilde-H_eps neighbourhood, using certified bounds.
HMembership h_tilde_membership(const PerturbationElement& h, double eps,
                               const RegionParams& params);

// h and h^-1 both in tilde-H_eps.
bool in_h_eps(const PerturbationElement& h, double eps,
              const RegionParams& params);

struct PerturbationOptions {
  // Entry scale of alpha - 1 and gamma - 1; beta is scaled proportionally.
  // Defaults to eps / (8 d).
  std::optional<double> scale;
  int max_attempts = 10000;
};

// Random element of H_eps by rejection.  Throws std::runtime_error when the
// attempt budget runs out.
PerturbationElement sample_h_eps(double eps, const RegionParams& params,
                                 std::uint64_t seed,
                                 const PerturbationOptions& options = {});

// alpha = 1, gamma = 1 and beta with operator norm `factor` times the
// tilde-H_eps limit (factor > 1 leaves H_eps on purpose).
PerturbationElement make_shear(double eps, const RegionParams& params,
                               double factor);

struct SandwichReport {
  std::uint64_t forward_checked = 0;   // z in E_T, h z in E_plus?
  std::uint64_t forward_violations = 0;
  std::uint64_t backward_checked = 0;  // z in E_minus, h^-1 z in E_T?
  std::uint64_t backward_violations = 0;
  std::vector<std::vector<double>> witnesses;  // at most 16
  std::uint64_t violations() const {
    return forward_violations + backward_violations;
  }
};

// Empirical check of E_minus in h E_T in E_plus.  Requires T > 10 and an
// admissible eps.
SandwichReport sandwich_check(const PerturbationElement& h,
                              const RegionParams& params, double eps,
                              std::size_t samples, std::uint64_t seed);

}  // namespace kglab
