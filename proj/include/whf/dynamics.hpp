#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "whf/functionals.hpp"
#include "whf/grid.hpp"
#include "whf/operators.hpp"

namespace whf {

/// Cotangent coordinates (rho, Phi). rho > 0 with unit mass, Phi zero-mean.
struct DualState {
  ScalarField rho;
  ScalarField phi;
};

/// Tangent coordinates (rho, d rho / dt).
struct PrimalState {
  ScalarField rho;
  TangentVector rho_dot;
};

/// Time derivative of a DualState under the Hamiltonian flow.
struct DualRhs {
  TangentVector drho;
  ScalarField dphi;
};

/// Throws if rho is not positive with unit mass (1e-12) or phi is not
/// zero-mean.
void check_state(const DualState& s);

/// 1/2 g_W(Phi, Phi) in dual form.
double kinetic_energy(const DualState& s);
double hamiltonian(const DualState& s, const EnergyFunctional& F);
double lagrangian(const PrimalState& p, const EnergyFunctional& F, double tol = kDefaultSolverTol);

/// Phi = (-Delta_rho)^dagger rho_dot.
DualState legendre_to_dual(const PrimalState& p, double tol = kDefaultSolverTol);
/// rho_dot = -Delta_rho Phi.
PrimalState legendre_to_primal(const DualState& s);

/// Continuity and Hamilton-Jacobi right-hand sides:
///   drho = -div(rho_f grad Phi),
///   dphi = -1/2 |grad Phi|^2 (face squares averaged to cells) - dF/drho,
/// with dphi returned zero-mean.
DualRhs rhs_dual(const DualState& s, const EnergyFunctional& F);

/// dt * max|grad Phi| / h.
double courant_number(const DualState& s, double dt);
inline constexpr double kMaxCourant = 0.5;

/// Classical explicit RK4 step. Rejects dt above the Courant guard and
/// reports positivity loss naming the stage.
DualState step_rk4(const DualState& s, const EnergyFunctional& F, double dt);

struct MidpointOptions {
  double tol = 1e-13;   // max-norm change between fixed-point iterates, relative
  int max_iters = 100;
  int max_halvings = 3; // dt/2 retries before giving up
};

/// Implicit midpoint rule solved by fixed-point iteration. On divergence the
/// step is retried as two steps of dt/2, at most `max_halvings` deep.
DualState step_midpoint(const DualState& s, const EnergyFunctional& F, double dt,
                        const MidpointOptions& options = {});

/// Gamma_W(rho_dot, rho_dot) = Delta_{rho_dot} Phi - 1/2 Delta_rho |grad Phi|^2,
/// Phi = (-Delta_rho)^dagger rho_dot. The first weight is signed.
ScalarField christoffel_term(const PrimalState& p, double tol = kDefaultSolverTol);

struct DiagnosticsRow {
  double t = 0.0;
  double hamiltonian = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double mass = 0.0;
  double min_rho = 0.0;
  int cg_iters = 0;
};

DiagnosticsRow diagnose(double t, const DualState& s, const EnergyFunctional& F, int cg_iters = 0);

/// States at uniformly spaced times with one diagnostics row per state.
struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<DualState> states;
  std::vector<DiagnosticsRow> diagnostics;

  std::size_t size() const noexcept { return states.size(); }
  void append(double t, DualState s, const EnergyFunctional& F, int cg_iters = 0);
};

enum class Integrator { Rk4, Midpoint };

struct IntegrationOptions {
  Integrator method = Integrator::Midpoint;
  double dt = 1e-3;
  int steps = 0;
  MidpointOptions midpoint{};
};

Trajectory integrate(const DualState& initial, const EnergyFunctional& F, const IntegrationOptions& options);

/// Max-norm of d_tt rho + Gamma_W(d_t rho, d_t rho) + grad_W F at node k,
/// with time derivatives from centred differences. Requires 1 <= k <= size-2.
double primal_residual(const Trajectory& traj, const EnergyFunctional& F, std::size_t k, double tol = 1e-12);

/// Trapezoid rule for the integral of the Lagrangian along the path, with
/// rho_dot from legendre_to_primal at each node.
double action(const Trajectory& traj, const EnergyFunctional& F, double tol = 1e-12);

struct GeodesicEnergy {
  double energy = 0.0;
  /// max_k |e_k - mean e| / |mean e| for the integrand e_k = g_W(rho_dot, rho_dot).
  double max_relative_deviation = 0.0;
};

GeodesicEnergy geodesic_energy(const Trajectory& traj, double tol = 1e-12);

/// `t,hamiltonian,kinetic,potential,mass,min_rho,cg_iters`
void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace whf
