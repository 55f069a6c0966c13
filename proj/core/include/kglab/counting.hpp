#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kglab/approx_fn.hpp"
#include "kglab/geometry.hpp"
#include "kglab/matrix.hpp"
#include "kglab/norms.hpp"

namespace kglab {

// Solutions are restricted to (p, q) = v (mod N), coordinatewise.
class CongruenceClass {
 public:
  CongruenceClass(std::vector<std::int64_t> residues, std::int64_t modulus);
  static CongruenceClass trivial(int dim) { return {std::vector<std::int64_t>(dim, 0), 1}; }

  const std::vector<std::int64_t>& residues() const { return residues_; }
  std::int64_t modulus() const { return modulus_; }
  int dim() const { return static_cast<int>(residues_.size()); }
  // gcd(v_1, ..., v_d, N).
  std::int64_t content() const;

 private:
  std::vector<std::int64_t> residues_;  // reduced into [0, N)
  std::int64_t modulus_;
};

using ThetaMatrix = RealMatrix;

// Inline "r11,r12;r21,r22" (rows separated by ';').
ThetaMatrix parse_theta(std::string_view text, int m, int n);
// One row per line, entries separated by commas or whitespace.
ThetaMatrix read_theta_file(const std::string& path, int m, int n);

class ProblemInstance {
 public:
  // Throws std::invalid_argument when nu2 is not normalized (integer minimum
  // 1 within 1e-12) or dimensions disagree.
  ProblemInstance(int m, int n, NormSpec nu1, NormSpec nu2, ApproxFunction psi,
                  CongruenceClass cong);

  int m() const { return m_; }
  int n() const { return n_; }
  int d() const { return m_ + n_; }
  const NormSpec& nu1() const { return nu1_; }
  const NormSpec& nu2() const { return nu2_; }
  const ApproxFunction& psi() const { return psi_; }
  const CongruenceClass& congruence() const { return cong_; }

  // The asymptotic theory assumes d >= 3; counting works for any d.
  bool low_dimension_warning() const { return d() < 3; }

  RegionParams region_params(double T) const;

  // N^-d c_nu1 c_nu2.
  double main_term_coefficient() const;

 private:
  int m_;
  int n_;
  NormSpec nu1_;
  NormSpec nu2_;
  ApproxFunction psi_;
  CongruenceClass cong_;
};

// #{x in Z : a < x < b, x = v (mod N)}.
std::int64_t count_congruent_in_interval(double a, double b, std::int64_t v,
                                         std::int64_t N);

struct QPoint {
  std::vector<std::int64_t> q;
  double t = 0.0;  // nu2(q)^n
};

// Every q = v_q (mod N) with 1 <= nu2(q)^n < T, once each, in lexicographic
// order of the enclosing box.
void for_each_q(const ProblemInstance& instance, double T,
                const std::function<void(const QPoint&)>& visit);
std::vector<QPoint> enumerate_q(const ProblemInstance& instance, double T);

struct CountReport {
  std::uint64_t count = 0;
  // Candidates with |nu1(theta q + p)^m - psi(t)| < 1e-12; counted by the
  // strict comparison regardless.
  std::uint64_t near_ties = 0;
};

CountReport count_solutions_detailed(const ProblemInstance& instance,
                                     const ThetaMatrix& theta, double T);
std::uint64_t count_solutions(const ProblemInstance& instance,
                              const ThetaMatrix& theta, double T);

// result[i] == count_solutions(instance, theta, grid[i]) for an increasing
// grid, from one pass over q.
std::vector<std::uint64_t> count_solutions_grid(const ProblemInstance& instance,
                                                const ThetaMatrix& theta,
                                                std::span<const double> grid);

// #(u(theta)(N Z^d + v) cap E_T) by direct enumeration and region membership.
std::uint64_t count_via_lattice_points(const ProblemInstance& instance,
                                       const ThetaMatrix& theta, double T);

// #(u(theta)(Z^d + v/N) cap N^-1 E_T).  Equal to the two counts above; bit
// exact when N is a power of two.
std::uint64_t count_via_scaled_lattice(const ProblemInstance& instance,
                                       const ThetaMatrix& theta, double T);

}  // namespace kglab
