#pragma once

#include <complex>
#include <filesystem>
#include <vector>

#include "whf/dynamics.hpp"
#include "whf/grid.hpp"
#include "whf/spectral.hpp"

namespace whf {

using Complex = std::complex<double>;

/// Complex amplitude per cell, sqrt(density) units.
struct WaveFunction {
  Grid grid;
  std::vector<Complex> values;

  explicit WaveFunction(const Grid& g) : grid(g), values(g.size()) {}
  WaveFunction(const Grid& g, std::vector<Complex> v);

  std::size_t size() const noexcept { return values.size(); }
};

/// integrate(|psi|^2).
double norm_squared(const WaveFunction& psi);
/// Rescales to unit norm. Throws on a zero state.
void normalize(WaveFunction& psi);

/// Strang splitting for i psi_t = -1/2 Laplacian psi + V psi: half potential
/// phase, spectral kinetic step exp(-i |2 pi k|^2 dt / 2), half potential phase.
class SplitStepSolver {
 public:
  SplitStepSolver(const ScalarField& potential, double dt);

  WaveFunction step(const WaveFunction& psi) const;
  void advance(WaveFunction& psi, int steps) const;

 private:
  Spectral spectral_;
  double dt_;
  std::vector<Complex> half_potential_;
  std::vector<Complex> kinetic_;
};

WaveFunction split_step(const WaveFunction& psi, const ScalarField& potential, double dt);

/// Density and face current for psi = sqrt(rho) exp(-i Phi). The current is
/// rho_face * arg(conj(psi_j) psi_{j+e_a}) / h, which approximates
/// -rho grad Phi without unwrapping the phase.
struct Madelung {
  ScalarField rho;
  VectorField current;
};

Madelung madelung_decompose(const WaveFunction& psi);

/// grad Phi on faces recovered as -current / rho_face.
VectorField madelung_velocity(const Madelung& m);

/// sqrt(rho) exp(-i Phi), normalized.
WaveFunction madelung_compose(const ScalarField& rho, const ScalarField& phi);

/// Forward (eta) and backward (eta_star) heat solutions.
struct HeatPair {
  ScalarField eta;
  ScalarField eta_star;
};

/// Pair at time t in [t0, t1] from eta(t0) = boundary.eta and
/// eta_star(t1) = boundary.eta_star, each propagated by the spectral heat
/// semigroup exp(-|2 pi k|^2 s / 2) in its dissipative direction.
HeatPair heat_pair_evolve(const HeatPair& boundary, double t0, double t1, double t);

/// integrate(eta * eta_star).
double product_integral(const HeatPair& hp);

struct HopfCole {
  DualState state;
  /// integrate(eta * eta_star) before normalization.
  double normalization = 1.0;
};

/// rho = eta * eta_star / normalization and Phi = 1/2 log(eta_star / eta),
/// zero-mean. This Phi makes (rho, Phi) satisfy the continuity equation
/// d_t rho + div(rho grad Phi) = 0 for the pair above.
HopfCole hopf_cole(const HeatPair& hp);

void write_wavefunction_csv(const std::filesystem::path& path, const WaveFunction& psi);

}  // namespace whf
