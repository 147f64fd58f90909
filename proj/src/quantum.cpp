#include "whf/quantum.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "whf/error.hpp"
#include "whf/io.hpp"
#include "whf/operators.hpp"

namespace whf {

namespace {

ScalarField heat_propagate(const Spectral& spectral, const ScalarField& f, double s) {
  return spectral.apply(f, [&](std::size_t i) { return std::exp(-0.5 * spectral.continuum_k2(i) * s); });
}

}  // namespace

WaveFunction::WaveFunction(const Grid& g, std::vector<Complex> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) throw Error(ErrorKind::InvalidArgument, "wave function size does not match grid");
}

double norm_squared(const WaveFunction& psi) {
  double s = 0.0;
  for (const auto& z : psi.values) s += std::norm(z);
  return s * psi.grid.cell_volume();
}

void normalize(WaveFunction& psi) {
  const double n2 = norm_squared(psi);
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw Error(ErrorKind::InvalidArgument, "cannot normalize a zero wave function");
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& z : psi.values) z *= scale;
}

SplitStepSolver::SplitStepSolver(const ScalarField& potential, double dt)
    : spectral_(potential.grid), dt_(dt), half_potential_(potential.size()), kinetic_(potential.size()) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "split-step dt must be positive");
  require_finite(potential, "potential");
  for (std::size_t j = 0; j < potential.size(); ++j) half_potential_[j] = std::polar(1.0, -0.5 * dt * potential[j]);
  for (std::size_t i = 0; i < kinetic_.size(); ++i) kinetic_[i] = std::polar(1.0, -0.5 * dt * spectral_.continuum_k2(i));
}

WaveFunction SplitStepSolver::step(const WaveFunction& psi) const {
  WaveFunction out = psi;
  advance(out, 1);
  return out;
}

void SplitStepSolver::advance(WaveFunction& psi, int steps) const {
  require_same_grid(psi.grid, spectral_.grid(), "split_step");
  auto& v = psi.values;
  for (int s = 0; s < steps; ++s) {
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= half_potential_[j];
    spectral_.forward(v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= kinetic_[i];
    spectral_.inverse(v);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= half_potential_[j];
  }
}

WaveFunction split_step(const WaveFunction& psi, const ScalarField& potential, double dt) {
  return SplitStepSolver(potential, dt).step(psi);
}

Madelung madelung_decompose(const WaveFunction& psi) {
  const Grid& g = psi.grid;
  ScalarField rho(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    rho[j] = std::norm(psi.values[j]);
    if (!(rho[j] > 0.0)) {
      throw Error(ErrorKind::Positivity, "wave function vanishes at cell " + std::to_string(j) +
                                             "; the Madelung decomposition needs a node-free state");
    }
  }
  const VectorField rho_f = face_average(rho);
  VectorField current(g);
  const double inv_h = 1.0 / g.spacing();
  for (int a = 0; a < g.dim(); ++a) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Complex z = std::conj(psi.values[j]) * psi.values[g.neighbor(j, a, 1)];
      current.components[a][j] = rho_f.components[a][j] * std::arg(z) * inv_h;
    }
  }
  return {std::move(rho), std::move(current)};
}

VectorField madelung_velocity(const Madelung& m) {
  const VectorField rho_f = face_average(m.rho);
  VectorField v(m.rho.grid);
  for (int a = 0; a < m.rho.grid.dim(); ++a) {
    for (std::size_t j = 0; j < m.rho.size(); ++j) {
      v.components[a][j] = -m.current.components[a][j] / rho_f.components[a][j];
    }
  }
  return v;
}

WaveFunction madelung_compose(const ScalarField& rho, const ScalarField& phi) {
  require_positive(rho, "density (Madelung)");
  require_same_grid(rho.grid, phi.grid, "madelung_compose");
  WaveFunction psi(rho.grid);
  for (std::size_t j = 0; j < rho.size(); ++j) psi.values[j] = std::polar(std::sqrt(rho[j]), -phi[j]);
  normalize(psi);
  return psi;
}

HeatPair heat_pair_evolve(const HeatPair& boundary, double t0, double t1, double t) {
  if (!(t1 > t0)) throw Error(ErrorKind::InvalidArgument, "heat pair needs t1 > t0");
  if (t < t0 || t > t1) throw Error(ErrorKind::InvalidArgument, "heat pair time outside [t0, t1]");
  require_same_grid(boundary.eta.grid, boundary.eta_star.grid, "heat_pair_evolve");
  const Spectral spectral(boundary.eta.grid);
  return {heat_propagate(spectral, boundary.eta, t - t0), heat_propagate(spectral, boundary.eta_star, t1 - t)};
}

double product_integral(const HeatPair& hp) { return inner(hp.eta, hp.eta_star); }

HopfCole hopf_cole(const HeatPair& hp) {
  require_positive(hp.eta, "eta");
  require_positive(hp.eta_star, "eta_star");
  require_same_grid(hp.eta.grid, hp.eta_star.grid, "hopf_cole");
  const Grid& g = hp.eta.grid;
  ScalarField rho(g);
  ScalarField phi(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    rho[j] = hp.eta[j] * hp.eta_star[j];
    phi[j] = 0.5 * std::log(hp.eta_star[j] / hp.eta[j]);
  }
  const double mass = integrate(rho);
  rho *= 1.0 / mass;
  remove_mean(phi);
  return {{std::move(rho), std::move(phi)}, mass};
}

void write_wavefunction_csv(const std::filesystem::path& path, const WaveFunction& psi) {
  write_complex_csv(path, psi.grid, psi.values);
}

}  // namespace whf
