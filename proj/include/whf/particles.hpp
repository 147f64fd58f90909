#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "whf/functionals.hpp"
#include "whf/grid.hpp"

namespace whf {

/// Positions wrapped to [0,1)^d and velocities of N equally weighted samples.
/// Coordinates are interleaved: particle i occupies [i*dim, i*dim + dim).
struct ParticleEnsemble {
  int dim = 1;
  std::vector<double> positions;
  std::vector<double> velocities;

  std::size_t size() const noexcept { return positions.size() / static_cast<std::size_t>(dim); }
};

/// Samples N positions from rho0 (inverse CDF of the piecewise-linear
/// interpolant in 1D, rejection against max rho0 in 2D) and sets velocities
/// to grad(phi0) interpolated from the staggered faces. Deterministic in seed.
ParticleEnsemble init_from_density(const ScalarField& rho0, const ScalarField& phi0, std::size_t count,
                                   std::uint64_t seed);

/// Accelerations (N * dim, interleaved) at time t for the given ensemble.
using Force = std::function<std::vector<double>(double t, const ParticleEnsemble&)>;

/// -coefficient * grad V(x) from a closed-form gradient.
Force analytic_force(std::function<std::array<double, 2>(std::array<double, 2>)> grad_potential,
                     double coefficient = 1.0);

/// -coefficient * grad V with V sampled on the grid: centred cell gradient
/// gathered with cloud-in-cell weights. Time- and density-independent.
Force potential_force(const ScalarField& potential, double coefficient = 1.0);

/// -grad(dF/drho) of the ensemble's own cloud-in-cell density estimate,
/// optionally smoothed once. The gradient is the centred cell difference and
/// it is gathered with the same cloud-in-cell weights used for deposition, so
/// an even interaction kernel exerts zero net force on the ensemble.
Force mean_field_force(EnergyFunctional F, const Grid& grid, bool smooth = true);

/// One velocity-Verlet step: half kick, drift with wrap, half kick.
ParticleEnsemble step_particles(const ParticleEnsemble& e, const Force& force, double t, double dt);

/// `steps` velocity-Verlet steps reusing the end-of-step acceleration.
void evolve_particles(ParticleEnsemble& e, const Force& force, double t0, double dt, int steps);

/// Cloud-in-cell histogram normalized to unit mass.
ScalarField push_forward(const ParticleEnsemble& e, const Grid& grid);

/// One pass of (1/4, 1/2, 1/4) averaging along every axis. Preserves mass.
ScalarField smooth_nearest_neighbor(const ScalarField& f);

/// L1 distance integrate(|a - b|).
double compare_densities(const ScalarField& a, const ScalarField& b);

/// (1/N) sum of velocities.
std::array<double, 2> mean_momentum(const ParticleEnsemble& e);

/// Multilinear interpolation of cell-centred samples at a point.
double interpolate_cells(const Grid& grid, const std::vector<double>& values, std::array<double, 2> x);

/// Multilinear interpolation of the staggered component `axis` at a point.
double interpolate_faces(const VectorField& v, int axis, std::array<double, 2> x);

/// `x[,y],vx[,vy]`
void write_ensemble_csv(const std::filesystem::path& path, const ParticleEnsemble& e);

}  // namespace whf
