#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "whf/error.hpp"
#include "whf/particles.hpp"
#include "whf/quantum.hpp"

using namespace whf;
constexpr double kPi = std::numbers::pi;

TEST_CASE("L1 distance between a cosine perturbation and uniform density") {
  const Grid g(1, 256);
  const ScalarField one(g, 1.0);
  const auto pert = ScalarField::from_function(g, [](auto x) { return 1.0 + 0.5 * std::cos(2 * kPi * x[0]); });
  CHECK(compare_densities(one, pert) == doctest::Approx(1.0 / kPi).epsilon(1e-4));
}

TEST_CASE("single particle in a cosine well matches a fine RK4 reference") {
  // V = -cos(2 pi x) / (2 pi)^2, so x'' = -sin(2 pi x) / (2 pi).
  const auto grad_v = [](std::array<double, 2> x) -> std::array<double, 2> {
    return {std::sin(2 * kPi * x[0]) / (2 * kPi), 0.0};
  };
  ParticleEnsemble e;
  e.positions = {0.25};
  e.velocities = {0.0};
  evolve_particles(e, analytic_force(grad_v), 0.0, 1e-3, 1000);

  double x = 0.25, v = 0.0;
  const double h = 1e-5;
  const auto acc = [](double y) { return -std::sin(2 * kPi * y) / (2 * kPi); };
  for (int k = 0; k < 100000; ++k) {
    const double k1x = v, k1v = acc(x);
    const double k2x = v + h / 2 * k1v, k2v = acc(x + h / 2 * k1x);
    const double k3x = v + h / 2 * k2v, k3v = acc(x + h / 2 * k2x);
    const double k4x = v + h * k3v, k4v = acc(x + h * k3x);
    x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  x -= std::floor(x);
  CHECK(std::abs(e.positions[0] - x) < 1e-6);
  CHECK(std::abs(e.velocities[0] - v) < 1e-6);
}

TEST_CASE("sampling is deterministic and follows the density") {
  const Grid g(1, 32);
  auto rho = ScalarField::from_function(g, [](auto x) { return 1.0 + 0.5 * std::cos(2 * kPi * x[0]); });
  const auto phi = ScalarField::from_function(g, [](auto x) { return 0.01 * std::sin(2 * kPi * x[0]); });
  const auto a = init_from_density(rho, phi, 20000, 7);
  const auto b = init_from_density(rho, phi, 20000, 7);
  CHECK(a.positions == b.positions);
  CHECK(a.velocities == b.velocities);
  CHECK(init_from_density(rho, phi, 20000, 8).positions != a.positions);
  for (double p : a.positions) CHECK((p >= 0.0 && p < 1.0));
  const auto est = push_forward(a, g);
  CHECK(integrate(est) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(compare_densities(est, rho) < 10.0 / std::sqrt(20000.0));
}

TEST_CASE("2D sampling and CIC deposit") {
  const Grid g(2, 16);
  const auto rho = ScalarField::from_function(g, [](auto x) { return 1.0 + 0.4 * std::cos(2 * kPi * x[1]); });
  const auto e = init_from_density(rho, ScalarField(g), 5000, 1);
  CHECK(e.size() == 5000);
  CHECK(e.dim == 2);
  CHECK(integrate(push_forward(e, g)) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("smoothing preserves mass and linear interpolation is exact") {
  const Grid g(2, 8);
  const auto f = ScalarField::from_function(g, [](auto x) { return 2.0 + std::sin(2 * kPi * x[0]) * x[1]; });
  CHECK(integrate(smooth_nearest_neighbor(f)) == doctest::Approx(integrate(f)).epsilon(1e-14));
  const Grid g1(1, 8);
  const auto lin = ScalarField::from_function(g1, [](auto x) { return x[0]; });
  CHECK(interpolate_cells(g1, lin.values, {0.3, 0.0}) == doctest::Approx(0.3));
}

TEST_CASE("an even mean-field kernel conserves momentum") {
  const Grid g(1, 32);
  const auto kernel = ScalarField::from_function(g, [](auto x) { return 0.2 * std::cos(2 * kPi * x[0]); });
  const auto F = EnergyFunctional::interaction(kernel, 1.0, InteractionMethod::Convolution);
  auto rho = ScalarField::from_function(g, [](auto x) { return 1.0 + 0.5 * std::cos(2 * kPi * x[0]); });
  auto e = init_from_density(rho, ScalarField(g), 4000, 3);
  const auto p0 = mean_momentum(e);
  evolve_particles(e, mean_field_force(F, g), 0.0, 1e-2, 20);
  CHECK(std::abs(mean_momentum(e)[0] - p0[0]) < 1e-14);
}

TEST_CASE("free plane wave acquires the exact phase") {
  const Grid g(1, 32);
  const int k = 3;
  WaveFunction psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) psi.values[i] = std::polar(1.0, 2 * kPi * k * g.center(i)[0]);
  const double dt = 1e-2;
  const auto out = split_step(psi, ScalarField(g), dt);
  const Complex factor = std::polar(1.0, -0.5 * std::pow(2 * kPi * k, 2) * dt);
  for (std::size_t i = 0; i < g.size(); i += 5) CHECK(std::abs(out.values[i] - factor * psi.values[i]) < 1e-12);
  CHECK(norm_squared(out) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Madelung compose and decompose round trip") {
  const Grid g(1, 64);
  auto rho = ScalarField::from_function(g, [](auto x) { return 1.0 + 0.5 * std::cos(2 * kPi * x[0]); });
  rho *= 1.0 / integrate(rho);
  const auto phi = ScalarField::from_function(g, [](auto x) { return 0.3 * std::sin(2 * kPi * x[0]); });
  const auto m = madelung_decompose(madelung_compose(rho, phi));
  CHECK(max_abs(m.rho - rho) < 1e-14);
  const auto v = madelung_velocity(m);
  const auto gp = gradient(phi);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(v.components[0][i] == doctest::Approx(gp.components[0][i]).epsilon(1e-12));

  WaveFunction zero(g);
  zero.values.assign(g.size(), Complex(1.0, 0.0));
  zero.values[5] = 0.0;
  try {
    madelung_decompose(zero);
    FAIL("expected a positivity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Positivity);
  }
}

TEST_CASE("heat pair: a single mode decays at its spectral rate") {
  const Grid g(1, 32);
  const auto eta = ScalarField::from_function(g, [](auto x) { return 1.0 + 0.5 * std::cos(2 * kPi * x[0]); });
  const auto eta_star = ScalarField::from_function(g, [](auto x) { return 1.0 + 0.4 * std::sin(2 * kPi * x[0]); });
  const HeatPair b{eta, eta_star};
  const double t = 0.05;
  const auto hp = heat_pair_evolve(b, 0.0, 0.2, t);
  const double decay = std::exp(-0.5 * std::pow(2 * kPi, 2) * t);
  const double decay_star = std::exp(-0.5 * std::pow(2 * kPi, 2) * (0.2 - t));
  for (std::size_t i = 0; i < g.size(); i += 3) {
    const double x = g.center(i)[0];
    CHECK(hp.eta[i] == doctest::Approx(1.0 + 0.5 * decay * std::cos(2 * kPi * x)).epsilon(1e-13));
    CHECK(hp.eta_star[i] == doctest::Approx(1.0 + 0.4 * decay_star * std::sin(2 * kPi * x)).epsilon(1e-13));
  }
  CHECK(product_integral(hp) == doctest::Approx(product_integral(heat_pair_evolve(b, 0.0, 0.2, 0.15))).epsilon(1e-13));
  const auto hc = hopf_cole(hp);
  CHECK(integrate(hc.state.rho) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(mean(hc.state.phi)) < 1e-14);
}
