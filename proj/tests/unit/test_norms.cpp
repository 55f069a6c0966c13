#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kglab/norms.hpp"

using namespace kglab;

namespace {

std::vector<double> random_vector(std::mt19937_64& gen, int dim) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> x(dim);
  for (auto& c : x) c = u(gen);
  return x;
}

double sup_norm(const std::vector<double>& x) {
  double v = 0.0;
  for (double c : x) v = std::max(v, std::abs(c));
  return v;
}

}  // namespace

TEST_CASE("eval_norm examples") {
  const std::vector<double> a{3, -4};
  CHECK(eval_norm(NormSpec::sup(2), a) == 4.0);
  const std::vector<double> b{3, 4};
  CHECK(eval_norm(NormSpec::lp(2, 2), b) == doctest::Approx(5.0).epsilon(1e-15));
  const std::vector<double> c{1, 1};
  CHECK(eval_norm(NormSpec::scaled(NormSpec::sup(2), 2.0), c) == 2.0);
  const std::vector<double> zero{0, 0, 0};
  CHECK(eval_norm(NormSpec::lp(1.5, 3), zero) == 0.0);
  CHECK_THROWS_AS(eval_norm(NormSpec::sup(2), zero), std::invalid_argument);
}

TEST_CASE("integer overload agrees with the real one") {
  const NormSpec nu = NormSpec::lp(3.0, 3);
  const std::vector<std::int64_t> zi{2, -1, 5};
  const std::vector<double> zr{2, -1, 5};
  CHECK(nu(zi) == nu(zr));
}

TEST_CASE("parse and to_string round trip") {
  for (const char* text : {"sup", "lp:2", "lp:1", "lp:3.5", "scaled:2:sup", "scaled:0.5:lp:1"}) {
    const NormSpec nu = NormSpec::parse(text, 3);
    CHECK(NormSpec::parse(nu.to_string(), 3) == nu);
  }
  CHECK_THROWS_AS(NormSpec::parse("lp:0.5", 2), std::invalid_argument);
  CHECK_THROWS_AS(NormSpec::parse("l2", 2), std::invalid_argument);
  CHECK_THROWS_AS(NormSpec::parse("scaled:-1:sup", 2), std::invalid_argument);
  CHECK_THROWS_AS(NormSpec::parse("sup", 0), std::invalid_argument);
}

TEST_CASE("norm axioms and comparison constants on random samples") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> r(0.01, 100.0);
  for (const char* text : {"sup", "lp:1", "lp:2", "lp:3", "scaled:0.7:lp:2", "scaled:3:sup"}) {
    for (int dim = 1; dim <= 4; ++dim) {
      const NormSpec nu = NormSpec::parse(text, dim);
      for (int k = 0; k < 200; ++k) {
        const auto x = random_vector(gen, dim);
        const auto y = random_vector(gen, dim);
        const double s = r(gen);
        std::vector<double> sx(dim), xy(dim);
        for (int i = 0; i < dim; ++i) {
          sx[i] = s * x[i];
          xy[i] = x[i] + y[i];
        }
        CHECK(std::abs(nu(sx) - s * nu(x)) <= 1e-12 * s * nu(x));
        CHECK(nu(xy) <= (nu(x) + nu(y)) * (1 + 1e-14));
        CHECK(nu.kappa_low() * sup_norm(x) <= nu(x) * (1 + 1e-14));
        CHECK(nu(x) <= nu.kappa_up() * sup_norm(x) * (1 + 1e-14));
      }
    }
  }
  CHECK(NormSpec::sup(3).kappa_low() == 1.0);
  CHECK(NormSpec::sup(3).kappa_up() == 1.0);
  CHECK(NormSpec::lp(2, 4).kappa_low() == 1.0);
  CHECK(NormSpec::lp(2, 4).kappa_up() == doctest::Approx(2.0));
}

TEST_CASE("ball volume constants") {
  for (int l = 1; l <= 6; ++l) CHECK(ball_volume_constant(NormSpec::sup(l)) == std::ldexp(1.0, l));
  CHECK(ball_volume_constant(NormSpec::lp(2, 2)) == doctest::Approx(std::numbers::pi).epsilon(1e-13));
  CHECK(ball_volume_constant(NormSpec::lp(1, 2)) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(ball_volume_constant(NormSpec::lp(2, 3)) ==
        doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-13));
  CHECK(ball_volume_constant(NormSpec::lp(1, 4)) == doctest::Approx(16.0 / 24.0).epsilon(1e-13));
  CHECK(ball_volume_constant(NormSpec::scaled(NormSpec::sup(2), 2.0)) == 1.0);
}

TEST_CASE("integer_min_norm examples") {
  auto a = integer_min_norm(NormSpec::sup(2));
  CHECK(a.value == 1.0);
  CHECK(a.minimizer == std::vector<std::int64_t>{1, 0});
  auto b = integer_min_norm(NormSpec::lp(2, 3));
  CHECK(b.value == 1.0);
  CHECK(b.minimizer == std::vector<std::int64_t>{1, 0, 0});
  auto c = integer_min_norm(NormSpec::scaled(NormSpec::sup(2), 0.5));
  CHECK(c.value == 0.5);
  CHECK(c.minimizer == std::vector<std::int64_t>{1, 0});
}

TEST_CASE("normalize_for_integers") {
  CHECK(normalize_for_integers(NormSpec::scaled(NormSpec::sup(2), 2.0)) == NormSpec::sup(2));
  CHECK(normalize_for_integers(NormSpec::lp(2, 3)) == NormSpec::lp(2, 3));
  CHECK(normalize_for_integers(NormSpec::scaled(NormSpec::lp(1, 2), 0.5)) == NormSpec::lp(1, 2));
  for (const char* text : {"scaled:0.3:lp:3", "scaled:7:sup", "lp:1.5"}) {
    const NormSpec once = normalize_for_integers(NormSpec::parse(text, 3));
    const NormSpec twice = normalize_for_integers(once);
    CHECK(std::abs(once.factor() - twice.factor()) <= 1e-12 * once.factor());
    CHECK(std::abs(integer_min_norm(once).value - 1.0) <= 1e-12);
  }
}

TEST_CASE("operator_norm examples") {
  const auto id = operator_norm(RealMatrix::identity(2), NormSpec::sup(2), NormSpec::sup(2));
  CHECK(id.value == 1.0);
  CHECK(id.exact);
  const auto diag = operator_norm(RealMatrix{{2, 0}, {0, 3}}, NormSpec::lp(2, 2), NormSpec::lp(2, 2));
  CHECK(diag.value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(diag.exact);
  const auto shear = operator_norm(RealMatrix{{1, 1}, {0, 1}}, NormSpec::sup(2), NormSpec::sup(2));
  CHECK(shear.value == 2.0);
  CHECK(shear.exact);
  const auto mixed = operator_norm(RealMatrix{{1, 1}, {0, 1}}, NormSpec::sup(2), NormSpec::lp(2, 2));
  CHECK_FALSE(mixed.exact);
  CHECK_THROWS_AS(operator_norm(RealMatrix(2, 3), NormSpec::sup(2), NormSpec::sup(2)),
                  std::invalid_argument);
}

TEST_CASE("operator_norm bounds hold on random unit vectors") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> g;
  const char* pairs[][2] = {{"sup", "sup"}, {"lp:2", "lp:2"}, {"lp:1", "lp:1"},
                            {"lp:3", "lp:3"}, {"sup", "lp:2"}, {"lp:1", "sup"}};
  for (auto& pair : pairs) {
    const NormSpec from = NormSpec::parse(pair[0], 3);
    const NormSpec to = NormSpec::parse(pair[1], 2);
    RealMatrix a(2, 3);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = g(gen);
    const auto op = operator_norm(a, from, to);
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> x(3);
      for (auto& c : x) c = g(gen);
      const double nx = from(x);
      for (auto& c : x) c /= nx;
      CHECK(to(multiply(a, x)) <= op.value * (1 + 1e-10));
    }
  }
}

TEST_CASE("sup to sup norm is attained by the sign vector of the maximal row") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    RealMatrix a(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = g(gen);
    const auto op = operator_norm(a, NormSpec::sup(3), NormSpec::sup(3));
    double best = 0.0;
    for (int r = 0; r < 3; ++r) {
      std::vector<double> x(3);
      for (int c = 0; c < 3; ++c) x[c] = a(r, c) >= 0 ? 1.0 : -1.0;
      best = std::max(best, NormSpec::sup(3)(multiply(a, x)));
    }
    CHECK(std::abs(best - op.value) <= 1e-6);
  }
}

TEST_CASE("spectral norm matches a 2x2 closed form") {
  const RealMatrix a{{1, 2}, {3, 4}};
  // sqrt of the largest eigenvalue of A^T A = [[10, 14], [14, 20]].
  const double expected = std::sqrt((30.0 + std::sqrt(100.0 + 4.0 * 196.0)) / 2.0);
  CHECK(spectral_norm(a) == doctest::Approx(expected).epsilon(1e-12));
}
