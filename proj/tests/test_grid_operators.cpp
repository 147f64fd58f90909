#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "whf/error.hpp"
#include "whf/grid.hpp"
#include "whf/io.hpp"
#include "whf/operators.hpp"

using namespace whf;
constexpr double kPi = std::numbers::pi;

namespace {

// Smooth positive random density: a few low modes with random amplitudes.
ScalarField random_density(const Grid& g, std::mt19937_64& rng, double spread = 0.4) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(g);
  const double a1 = spread * u(rng), a2 = spread * u(rng) / 2, b1 = spread * u(rng) / 2;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.center(i);
    f[i] = 1.0 + a1 * std::cos(2 * kPi * x[0]) + a2 * std::sin(4 * kPi * x[0]) +
           b1 * std::cos(2 * kPi * (x[0] + x[1]));
  }
  f *= 1.0 / integrate(f);
  return f;
}

ScalarField random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ScalarField f(g);
  for (auto& v : f.values) v = n(rng);
  return f;
}

}  // namespace

TEST_CASE("grid layout and neighbours") {
  const Grid g(2, 8);
  CHECK(g.size() == 64);
  CHECK(g.flat({2, 3}) == 19);
  CHECK(g.coords(19) == std::array<int, 2>{2, 3});
  CHECK(g.neighbor(g.flat({7, 0}), 0, 1) == g.flat({0, 0}));
  CHECK(g.neighbor(g.flat({0, 0}), 1, -1) == g.flat({0, 7}));
  CHECK(g.center(g.flat({4, 2}))[0] == doctest::Approx(0.5));
  CHECK(g.reflect(g.flat({1, 3})) == g.flat({7, 5}));
  CHECK_THROWS_AS(Grid(3, 8), Error);
  CHECK_THROWS_AS(Grid(1, 2), Error);
}

TEST_CASE("staggered gradient of sin at the first face") {
  const Grid g(1, 64);
  const auto f = ScalarField::from_function(g, [](auto x) { return std::sin(2 * kPi * x[0]); });
  // 64 sin(2 pi / 64)
  CHECK(gradient(f).components[0][0] == doctest::Approx(6.273096981091879).epsilon(1e-14));
}

TEST_CASE("discrete Laplacian eigenvalue of the first mode") {
  const Grid g(1, 64);
  const auto f = ScalarField::from_function(g, [](auto x) { return std::cos(2 * kPi * x[0]); });
  const auto lf = laplacian(f);
  // -(2 n sin(pi / n))^2 with n = 64
  const double lambda = -39.44671910136276;
  for (std::size_t i = 0; i < g.size(); i += 7) CHECK(lf[i] == doctest::Approx(lambda * f[i]).epsilon(1e-12));
}

TEST_CASE("property: divergence is the negative adjoint of gradient") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Grid g(1 + trial % 2, 4 + trial);
    const auto f = random_field(g, rng);
    VectorField v(g);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int a = 0; a < g.dim(); ++a)
      for (auto& x : v.components[a]) x = n(rng);
    const double lhs = face_inner(gradient(f), v);
    const double rhs = -inner(f, divergence(v));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + 1.0));
  }
}

TEST_CASE("shift and field arithmetic") {
  const Grid g(1, 8);
  ScalarField f(g);
  for (std::size_t i = 0; i < 8; ++i) f[i] = static_cast<double>(i);
  const auto s = shift(f, 0, 2);
  CHECK(s[2] == 0.0);
  CHECK(s[0] == 6.0);
  CHECK(mean(f) == doctest::Approx(3.5));
  auto z = f;
  remove_mean(z);
  CHECK(std::abs(mean(z)) < 1e-15);
  CHECK((2.0 * f - f)[5] == 5.0);
  ScalarField bad(g);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(require_finite(bad, "bad"), Error);
}

TEST_CASE("field CSV round trip is lossless") {
  std::mt19937_64 rng(3);
  const Grid g(2, 6);
  const auto f = random_field(g, rng);
  std::stringstream ss;
  write_field_csv(ss, f);
  const auto r = read_field_csv(ss);
  CHECK(r.grid == g);
  CHECK(r.values == f.values);
  std::stringstream broken("# grid d=1 n=4\n1\n2\n");
  CHECK_THROWS_AS(read_field_csv(broken), Error);
}

TEST_CASE("tangent vectors must have zero mass") {
  const Grid g(1, 8);
  CHECK_THROWS_AS(TangentVector(ScalarField(g, 1.0)), Error);
  CHECK(std::abs(integrate(TangentVector::project(ScalarField(g, 1.0)).field())) < 1e-15);
}

TEST_CASE("weighted Laplacian rejects nonpositive densities") {
  const Grid g(1, 8);
  ScalarField rho(g, 1.0);
  rho[4] = 0.0;
  try {
    apply_laplacian(rho, ScalarField(g));
    FAIL("expected a positivity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Positivity);
  }
  CHECK_NOTHROW(apply_laplacian_with_weight(rho, ScalarField(g)));
}

TEST_CASE("metric of the first cosine mode at uniform density") {
  const Grid g(1, 64);
  const ScalarField rho(g, 1.0);
  const auto phi = ScalarField::from_function(g, [](auto x) { return std::cos(2 * kPi * x[0]); });
  // |lambda| / 2
  CHECK(metric_dual(rho, phi, phi) == doctest::Approx(19.72335955068138).epsilon(1e-12));
}

TEST_CASE("pseudo-inverse matches a dense linear solve") {
  std::mt19937_64 rng(5);
  const Grid g(1, 8);
  const auto rho = random_density(g, rng);
  const auto sigma = TangentVector::project(random_field(g, rng));
  const std::size_t n = g.size();

  // Dense -Delta_rho plus the rank-one mean constraint, solved by Gaussian
  // elimination with partial pivoting.
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    ScalarField e(g);
    e[j] = 1.0;
    const auto col = apply_laplacian(rho, e).field();
    for (std::size_t i = 0; i < n; ++i) a[i][j] = -col[i] + 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) a[i][n] = sigma.field()[i];
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double m = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= n; ++k) a[r][k] -= m * a[c][k];
    }
  }
  SolveStats stats;
  const auto phi = pseudo_inverse(rho, sigma, 1e-14, &stats);
  for (std::size_t i = 0; i < n; ++i) CHECK(phi[i] == doctest::Approx(a[i][n] / a[i][i]).epsilon(1e-10));
  CHECK(stats.iterations > 0);
  CHECK(stats.relative_residual <= 1e-14);
}

TEST_CASE("property: pseudo-inverse solves and metric forms agree") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    const Grid g(1 + trial % 2, trial % 2 ? 12 : 32);
    const auto rho = random_density(g, rng);
    const auto s1 = TangentVector::project(random_field(g, rng));
    const auto s2 = TangentVector::project(random_field(g, rng));
    const PseudoInverse pinv(rho);
    const auto phi1 = pinv.solve(s1, 1e-13);
    const auto phi2 = pinv.solve(s2, 1e-13);
    CHECK(std::abs(mean(phi1)) < 1e-12);
    const auto back = apply_laplacian(rho, phi1).field();
    CHECK(max_abs(-back - s1.field()) <= 1e-9 * max_abs(s1.field()));
    const double d = metric_dual(rho, phi1, phi2);
    CHECK(metric_dual(rho, phi2, phi1) == d);
    CHECK(metric_primal(rho, s1, s2, 1e-13) == doctest::Approx(d).epsilon(1e-9));
    CHECK(metric_dual(rho, phi1, phi1) > 0.0);
  }
}

TEST_CASE("pseudo-inverse derivative identity") {
  std::mt19937_64 rng(23);
  const Grid g(1, 16);
  const auto rho = random_density(g, rng);
  ScalarField h = random_density(g, rng) - rho;
  h *= 5.0 / max_abs(h);
  const auto sigma = TangentVector::project(random_field(g, rng));
  const double e1 = pseudo_inverse_derivative_check(rho, TangentVector::project(h), sigma, 1e-2);
  const double e2 = pseudo_inverse_derivative_check(rho, TangentVector::project(h), sigma, 5e-3);
  CHECK(e2 < e1);
  CHECK(std::log(e1 / e2) / std::log(2.0) == doctest::Approx(2.0).epsilon(0.1));
}
