#include "kglab/matrix.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace kglab {

RealMatrix to_real(const IntMatrix& m) {
  RealMatrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out(r, c) = static_cast<double>(m(r, c));
  return out;
}

RealMatrix operator*(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matrix product: dimension mismatch");
  }
  RealMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

RealMatrix operator*(double s, const RealMatrix& a) {
  RealMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (double& v : out.row(r)) v *= s;
  return out;
}

RealMatrix operator+(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("matrix sum: dimension mismatch");
  }
  RealMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) += b(r, c);
  return out;
}

RealMatrix operator-(const RealMatrix& a) { return -1.0 * a; }

std::vector<double> multiply(const RealMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw std::invalid_argument("matrix-vector product: dimension mismatch");
  }
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c) * x[c];
    y[r] = s;
  }
  return y;
}

namespace {

// LU with partial pivoting, in place. Returns the permutation sign, or 0 if a
// zero pivot shows up.
int lu_in_place(RealMatrix& a, std::vector<std::size_t>& perm) {
  const std::size_t n = a.rows();
  perm.resize(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  int sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a(r, k)) > std::abs(a(pivot, k))) pivot = r;
    if (a(pivot, k) == 0.0) return 0;
    if (pivot != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(pivot, c));
      std::swap(perm[k], perm[pivot]);
      sign = -sign;
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a(r, k) / a(k, k);
      a(r, k) = f;
      for (std::size_t c = k + 1; c < n; ++c) a(r, c) -= f * a(k, c);
    }
  }
  return sign;
}

}  // namespace

double determinant(const RealMatrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("determinant: matrix not square");
  }
  RealMatrix lu = a;
  std::vector<std::size_t> perm;
  const int sign = lu_in_place(lu, perm);
  if (sign == 0) return 0.0;
  double det = sign;
  for (std::size_t i = 0; i < a.rows(); ++i) det *= lu(i, i);
  return det;
}

std::int64_t determinant(const IntMatrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("determinant: matrix not square");
  }
  // Bareiss fraction-free elimination; exact for the small entries we use.
  const std::size_t n = a.rows();
  if (n == 0) return 1;
  IntMatrix m = a;
  std::int64_t sign = 1;
  std::int64_t prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && m(swap_row, k) == 0) ++swap_row;
      if (swap_row == n) return 0;
      for (std::size_t c = 0; c < n; ++c) std::swap(m(k, c), m(swap_row, c));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

RealMatrix inverse(const RealMatrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("inverse: matrix not square");
  }
  const std::size_t n = a.rows();
  RealMatrix lu = a;
  std::vector<std::size_t> perm;
  if (lu_in_place(lu, perm) == 0) {
    throw std::domain_error("inverse: matrix is singular");
  }
  RealMatrix inv(n, n);
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = perm[i] == j ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < i; ++k) col[i] -= lu(i, k) * col[k];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t k = i + 1; k < n; ++k) col[i] -= lu(i, k) * col[k];
      col[i] /= lu(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

double max_abs_row_sum(const RealMatrix& a) {
  double best = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (double v : a.row(r)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

double max_abs_column_sum(const RealMatrix& a) {
  return max_abs_row_sum(a.transposed());
}

double condition_number(const RealMatrix& a) {
  return max_abs_row_sum(a) * max_abs_row_sum(inverse(a));
}

}  // namespace kglab
