#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "whf/dynamics.hpp"
#include "whf/error.hpp"
#include "whf/functionals.hpp"

using namespace whf;
constexpr double kPi = std::numbers::pi;

namespace {

ScalarField cosine_density(const Grid& g, double amp) {
  auto r = ScalarField::from_function(g, [amp](auto x) { return 1.0 + amp * std::cos(2 * kPi * x[0]); });
  r *= 1.0 / integrate(r);
  return r;
}

ScalarField mode(const Grid& g, double amp, int k = 1) {
  return ScalarField::from_function(g, [amp, k](auto x) { return amp * std::cos(2 * kPi * k * x[0]); });
}

}  // namespace

TEST_CASE("linear energy and its variation") {
  const Grid g(1, 32);
  const auto V = mode(g, 0.3);
  const auto rho = cosine_density(g, 0.5);
  const auto F = EnergyFunctional::linear(V, 2.0);
  CHECK(evaluate(F, rho) == doctest::Approx(2.0 * inner(V, rho)));
  auto expected = 2.0 * V;
  remove_mean(expected);
  CHECK(max_abs(first_variation(F, rho) - expected) < 1e-14);
}

TEST_CASE("interaction: direct and convolution agree") {
  const Grid g(2, 8);
  const auto kernel = ScalarField::from_function(
      g, [](auto x) { return std::cos(2 * kPi * x[0]) + 0.5 * std::cos(2 * kPi * x[1]); });
  const auto rho = ScalarField::from_function(g, [](auto x) {
    return 1.0 + 0.3 * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]);
  });
  const auto Fd = EnergyFunctional::interaction(kernel, 0.7, InteractionMethod::Direct);
  const auto Fc = EnergyFunctional::interaction(kernel, 0.7, InteractionMethod::Convolution);
  CHECK(evaluate(Fd, rho) == doctest::Approx(evaluate(Fc, rho)).epsilon(1e-12));
  CHECK(max_abs(first_variation(Fd, rho) - first_variation(Fc, rho)) < 1e-12);
  const auto odd = ScalarField::from_function(g, [](auto x) { return std::sin(2 * kPi * x[0]); });
  CHECK_THROWS_AS(static_cast<void>(Interaction(odd)), Error);
}

TEST_CASE("Fisher information of a uniform density vanishes") {
  const Grid g(1, 16);
  CHECK(fisher_information(ScalarField(g, 1.0)) == 0.0);
  CHECK(fisher_information(cosine_density(g, 0.5)) > 0.0);
}

TEST_CASE("property: first variations match centred differences") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  const Grid g(1, 32);
  for (int trial = 0; trial < 8; ++trial) {
    const auto rho = cosine_density(g, u(rng));
    auto F = EnergyFunctional::linear(mode(g, u(rng)), 1.0);
    F.add(Interaction(mode(g, u(rng), 2)), u(rng));
    F.add(FisherInformation{}, 0.1);
    const auto h = TangentVector::project(mode(g, 1.0, 1 + trial % 3) + mode(g, 0.5, 2));
    const double e1 = variation_check(F, rho, h, 1e-3);
    const double e2 = variation_check(F, rho, h, 5e-4);
    CHECK(e1 < 1e-5);
    CHECK(e2 < e1);
  }
}

TEST_CASE("hamiltonian of a single mode at uniform density") {
  const Grid g(1, 64);
  const DualState s{ScalarField(g, 1.0), mode(g, 1.0)};
  CHECK(kinetic_energy(s) == doctest::Approx(9.86167977534069).epsilon(1e-12));
  CHECK(hamiltonian(s, EnergyFunctional{}) == doctest::Approx(9.86167977534069).epsilon(1e-12));
}

TEST_CASE("Legendre transforms are mutually inverse") {
  const Grid g(1, 32);
  const DualState s{cosine_density(g, 0.4), mode(g, 0.05) + mode(g, 0.02, 3)};
  const auto p = legendre_to_primal(s);
  const auto back = legendre_to_dual(p, 1e-13);
  CHECK(max_abs(back.phi - s.phi) < 1e-10);
  CHECK(lagrangian(p, EnergyFunctional{}, 1e-13) == doctest::Approx(kinetic_energy(s)).epsilon(1e-10));
}

TEST_CASE("uniform density at rest is a fixed point") {
  const Grid g(1, 16);
  const DualState s{ScalarField(g, 1.0), ScalarField(g)};
  const auto next = step_midpoint(s, EnergyFunctional::fisher(0.1), 1e-3);
  CHECK(max_abs(next.rho - s.rho) < 1e-15);
  CHECK(max_abs(next.phi) < 1e-15);
}

TEST_CASE("RK4 and implicit midpoint converge to the same solution") {
  const Grid g(1, 32);
  const DualState s{cosine_density(g, 0.3), mode(g, 0.01)};
  const auto F = EnergyFunctional::linear(mode(g, 0.1), 1.0);
  IntegrationOptions o;
  o.dt = 1e-3;
  o.steps = 50;
  o.method = Integrator::Rk4;
  const auto a = integrate(s, F, o);
  o.method = Integrator::Midpoint;
  const auto b = integrate(s, F, o);
  CHECK(max_abs(a.states.back().rho - b.states.back().rho) < 1e-6);
  CHECK(a.size() == 51);
  CHECK(std::abs(b.diagnostics.back().mass - 1.0) < 1e-13);
}

TEST_CASE("Courant guard rejects oversized steps") {
  const Grid g(1, 16);
  const DualState s{ScalarField(g, 1.0), mode(g, 1.0)};
  try {
    step_rk4(s, EnergyFunctional{}, 1.0);
    FAIL("expected a time-step error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TimeStep);
  }
}

TEST_CASE("Christoffel term vanishes for a zero velocity") {
  const Grid g(1, 16);
  const PrimalState p{cosine_density(g, 0.3), TangentVector::zero(g)};
  CHECK(max_abs(christoffel_term(p)) == 0.0);
}

TEST_CASE("state checks") {
  const Grid g(1, 8);
  CHECK_THROWS_AS(check_state({ScalarField(g, 2.0), ScalarField(g)}), Error);
  CHECK_THROWS_AS(check_state({ScalarField(g, 1.0), ScalarField(g, 1.0)}), Error);
  CHECK_NOTHROW(check_state({ScalarField(g, 1.0), ScalarField(g)}));
}
