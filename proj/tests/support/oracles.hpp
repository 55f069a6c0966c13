#pragma once

// Test-side reference implementations.  They share no code with the library
// beyond plain data types, so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace oracle {

struct Norm {
  bool sup = true;
  double p = 2.0;
  double factor = 1.0;

  double operator()(const std::vector<double>& x) const {
    double v = 0.0;
    if (sup) {
      for (double c : x) v = std::max(v, std::fabs(c));
    } else {
      for (double c : x) v += std::pow(std::fabs(c), p);
      v = std::pow(v, 1.0 / p);
    }
    return factor * v;
  }
};

inline Norm norm_from(const std::string& name) {
  if (name == "sup") return {true, 0.0, 1.0};
  if (name == "lp:1") return {false, 1.0, 1.0};
  if (name == "lp:2") return {false, 2.0, 1.0};
  throw std::invalid_argument("oracle norm " + name);
}

struct Psi {
  double c = 1.0;
  double s = 0.0;
  double operator()(double t) const { return c * std::pow(t, -s); }
};

inline Psi psi_from(const std::string& name) {
  if (name == "pow:1:0.5") return {1.0, 0.5};
  if (name == "pow:1:1") return {1.0, 1.0};
  if (name == "const:0.9") return {0.9, 0.0};
  throw std::invalid_argument("oracle psi " + name);
}

inline std::int64_t mod(std::int64_t a, std::int64_t n) { return ((a % n) + n) % n; }

inline double power(double x, int k) { return std::pow(x, k); }

// Visits every integer vector in the box [lo, hi].
inline void for_box(const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi,
                    const std::function<void(const std::vector<std::int64_t>&)>& f) {
  std::vector<std::int64_t> z = lo;
  if (z.empty()) {
    f(z);
    return;
  }
  for (std::size_t i = 0; i < z.size(); ++i)
    if (lo[i] > hi[i]) return;
  while (true) {
    f(z);
    std::size_t i = z.size();
    while (i > 0 && z[i - 1] == hi[i - 1]) {
      z[i - 1] = lo[i - 1];
      --i;
    }
    if (i == 0) return;
    ++z[i - 1];
  }
}

// Brute-force N(theta, T): every q in a box large enough for the norm, and
// for each q every p in a box around -theta q that contains all candidates.
// theta is row-major m x n.
inline std::uint64_t brute_count(int m, int n, const Norm& nu1, const Norm& nu2,
                                 const Psi& psi, const std::vector<double>& theta,
                                 double T, const std::vector<std::int64_t>& v,
                                 std::int64_t N) {
  const auto Q = static_cast<std::int64_t>(std::ceil(std::pow(T, 1.0 / n) / nu2.factor)) + 1;
  const double r = std::pow(psi(1.0), 1.0 / m) / nu1.factor + 1.0;
  std::uint64_t total = 0;
  std::vector<double> y(n), x(m);
  for_box(std::vector<std::int64_t>(n, -Q), std::vector<std::int64_t>(n, Q),
          [&](const std::vector<std::int64_t>& q) {
            for (int j = 0; j < n; ++j) {
              if (mod(q[j], N) != mod(v[m + j], N)) return;
              y[j] = static_cast<double>(q[j]);
            }
            const double t = power(nu2(y), n);
            if (!(t >= 1.0 && t < T)) return;
            const double bound = psi(t);
            std::vector<double> s(m, 0.0);
            std::vector<std::int64_t> lo(m), hi(m);
            for (int i = 0; i < m; ++i) {
              for (int j = 0; j < n; ++j) s[i] += theta[i * n + j] * y[j];
              lo[i] = static_cast<std::int64_t>(std::floor(-s[i] - r));
              hi[i] = static_cast<std::int64_t>(std::ceil(-s[i] + r));
            }
            for_box(lo, hi, [&](const std::vector<std::int64_t>& p) {
              for (int i = 0; i < m; ++i) {
                if (mod(p[i], N) != mod(v[i], N)) return;
                x[i] = s[i] + static_cast<double>(p[i]);
              }
              if (power(nu1(x), m) < bound) ++total;
            });
          });
  return total;
}

// Points of the affine lattice B (Z^d + w/N), B an integer matrix, inside the
// box [lo, hi), found by scanning the grid (1/N) Z^d and testing membership
// with exact integer arithmetic: x is a point iff adj(B)(N x - B w) is
// divisible by N det(B).  The origin is not counted.
inline std::uint64_t scan_affine_lattice(const std::vector<std::vector<std::int64_t>>& B,
                                         const std::vector<std::int64_t>& w, std::int64_t N,
                                         const std::vector<double>& lo,
                                         const std::vector<double>& hi) {
  const std::size_t d = B.size();
  // Cofactor expansion; d <= 4 in the tests.
  std::function<std::int64_t(const std::vector<std::vector<std::int64_t>>&)> det =
      [&](const std::vector<std::vector<std::int64_t>>& a) -> std::int64_t {
    const std::size_t k = a.size();
    if (k == 1) return a[0][0];
    std::int64_t total = 0;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<std::vector<std::int64_t>> minor;
      for (std::size_t r = 1; r < k; ++r) {
        std::vector<std::int64_t> row;
        for (std::size_t cc = 0; cc < k; ++cc)
          if (cc != c) row.push_back(a[r][cc]);
        minor.push_back(row);
      }
      total += ((c % 2 == 0) ? 1 : -1) * a[0][c] * det(minor);
    }
    return total;
  };
  const std::int64_t D = det(B);
  std::vector<std::vector<std::int64_t>> adj(d, std::vector<std::int64_t>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<std::vector<std::int64_t>> minor;
      for (std::size_t r = 0; r < d; ++r) {
        if (r == j) continue;
        std::vector<std::int64_t> row;
        for (std::size_t c = 0; c < d; ++c)
          if (c != i) row.push_back(B[r][c]);
        minor.push_back(row);
      }
      adj[i][j] = (((i + j) % 2 == 0) ? 1 : -1) * (d == 1 ? 1 : det(minor));
    }
  }
  std::vector<std::int64_t> Bw(d, 0);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) Bw[r] += B[r][c] * w[c];
  std::vector<std::int64_t> glo(d), ghi(d);
  for (std::size_t i = 0; i < d; ++i) {
    glo[i] = static_cast<std::int64_t>(std::ceil(lo[i] * N));
    ghi[i] = static_cast<std::int64_t>(std::ceil(hi[i] * N)) - 1;
  }
  const bool zero_shift = std::all_of(w.begin(), w.end(), [&](auto x) { return mod(x, N) == 0; });
  std::uint64_t total = 0;
  for_box(glo, ghi, [&](const std::vector<std::int64_t>& g) {
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = static_cast<double>(g[i]) / N;
      if (!(xi >= lo[i] && xi < hi[i])) return;
    }
    if (zero_shift && std::all_of(g.begin(), g.end(), [](auto x) { return x == 0; })) return;
    for (std::size_t i = 0; i < d; ++i) {
      std::int64_t acc = 0;
      for (std::size_t j = 0; j < d; ++j) acc += adj[i][j] * (g[j] - Bw[j]);
      if (acc % (N * D) != 0) return;
    }
    ++total;
  });
  return total;
}

// Orbit of v under SL_3(F_2), by enumerating all 512 matrices mod 2.
inline std::vector<std::vector<int>> sl3f2_orbit(const std::vector<int>& v) {
  std::vector<std::vector<int>> orbit;
  int group_size = 0;
  for (int bits = 0; bits < 512; ++bits) {
    int a[3][3];
    for (int k = 0; k < 9; ++k) a[k / 3][k % 3] = (bits >> k) & 1;
    const int det = (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]));
    if (mod(det, 2) != 1) continue;
    ++group_size;
    std::vector<int> image(3);
    for (int r = 0; r < 3; ++r) image[r] = (a[r][0] * v[0] + a[r][1] * v[1] + a[r][2] * v[2]) % 2;
    if (std::find(orbit.begin(), orbit.end(), image) == orbit.end()) orbit.push_back(image);
  }
  if (group_size != 168) throw std::logic_error("SL3(F2) should have 168 elements");
  std::sort(orbit.begin(), orbit.end());
  return orbit;
}

// Upper 0.1% points of the chi-square distribution.
inline double chi_square_critical_001(int dof) {
  static const double table[] = {0.0,     10.8276, 13.8155, 16.2662, 18.4668, 20.5150,
                                 22.4577, 24.3219, 26.1245, 27.8772, 29.5883};
  if (dof < 1 || dof > 10) throw std::invalid_argument("chi-square table covers 1..10 dof");
  return table[dof];
}

}  // namespace oracle
