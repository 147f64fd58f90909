#include "whf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "whf/error.hpp"
#include "whf/io.hpp"

namespace whf {

namespace {

DualState combine(const DualState& s, double dt, const DualRhs& k) {
  DualState out = s;
  out.rho.add_scaled(dt, k.drho.field());
  out.phi.add_scaled(dt, k.dphi);
  return out;
}

bool all_positive(const ScalarField& f) {
  return std::all_of(f.values.begin(), f.values.end(), [](double v) { return v > 0.0; });
}

bool all_finite(const ScalarField& f) {
  return std::all_of(f.values.begin(), f.values.end(), [](double v) { return std::isfinite(v); });
}

void check_mass_conserved(const ScalarField& before, const ScalarField& after, const char* where) {
  const double drift = std::abs(integrate(after) - integrate(before));
  if (drift > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, std::string(where) + ": mass changed by " + std::to_string(drift));
  }
}

}  // namespace

void check_state(const DualState& s) {
  require_same_grid(s.rho.grid, s.phi.grid, "dual state");
  require_positive(s.rho, "density");
  require_finite(s.phi, "potential");
  const double mass = integrate(s.rho);
  if (std::abs(mass - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "density mass must be 1, got " + format_double(mass));
  }
  const double phi_mean = integrate(s.phi);
  if (std::abs(phi_mean) > 1e-12 * std::max(1.0, max_abs(s.phi))) {
    throw Error(ErrorKind::InvalidArgument, "potential must have zero mean, got " + format_double(phi_mean));
  }
}

double kinetic_energy(const DualState& s) { return 0.5 * metric_dual(s.rho, s.phi, s.phi); }

double hamiltonian(const DualState& s, const EnergyFunctional& F) { return kinetic_energy(s) + evaluate(F, s.rho); }

double lagrangian(const PrimalState& p, const EnergyFunctional& F, double tol) {
  return 0.5 * metric_primal(p.rho, p.rho_dot, p.rho_dot, tol) - evaluate(F, p.rho);
}

DualState legendre_to_dual(const PrimalState& p, double tol) {
  return {p.rho, pseudo_inverse(p.rho, p.rho_dot, tol)};
}

PrimalState legendre_to_primal(const DualState& s) {
  ScalarField rho_dot = WeightedLaplacian(s.rho).apply(s.phi);
  rho_dot *= -1.0;
  return {s.rho, TangentVector(std::move(rho_dot))};
}

DualRhs rhs_dual(const DualState& s, const EnergyFunctional& F) {
  const WeightedLaplacian op(s.rho);
  const VectorField grad_phi = gradient(s.phi);
  ScalarField drho = divergence(multiply(op.face_weights(), grad_phi));
  drho *= -1.0;

  ScalarField dphi = squared_norm_at_cells(grad_phi);
  dphi *= -0.5;
  if (!F.empty()) dphi -= first_variation(F, s.rho);
  remove_mean(dphi);
  return {TangentVector(std::move(drho)), std::move(dphi)};
}

double courant_number(const DualState& s, double dt) {
  const VectorField g = gradient(s.phi);
  double vmax = 0.0;
  for (int a = 0; a < s.phi.grid.dim(); ++a) {
    for (double v : g.components[a]) vmax = std::max(vmax, std::abs(v));
  }
  return dt * vmax / s.phi.grid.spacing();
}

DualState step_rk4(const DualState& s, const EnergyFunctional& F, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  const double cfl = courant_number(s, dt);
  if (cfl > kMaxCourant) {
    throw Error(ErrorKind::TimeStep, "rk4: dt * max|grad phi| / h = " + format_double(cfl) + " exceeds " +
                                         format_double(kMaxCourant));
  }
  auto stage_state = [&](double c, const DualRhs& k, const char* name) {
    DualState out = combine(s, c * dt, k);
    if (!all_positive(out.rho)) {
      throw Error(ErrorKind::Positivity, std::string("rk4 ") + name + ": density lost positivity");
    }
    return out;
  };
  const DualRhs k1 = rhs_dual(s, F);
  const DualRhs k2 = rhs_dual(stage_state(0.5, k1, "stage 2"), F);
  const DualRhs k3 = rhs_dual(stage_state(0.5, k2, "stage 3"), F);
  const DualRhs k4 = rhs_dual(stage_state(1.0, k3, "stage 4"), F);

  DualState out = s;
  const double w = dt / 6.0;
  out.rho.add_scaled(w, k1.drho.field()).add_scaled(2 * w, k2.drho.field());
  out.rho.add_scaled(2 * w, k3.drho.field()).add_scaled(w, k4.drho.field());
  out.phi.add_scaled(w, k1.dphi).add_scaled(2 * w, k2.dphi);
  out.phi.add_scaled(2 * w, k3.dphi).add_scaled(w, k4.dphi);
  remove_mean(out.phi);
  if (!all_positive(out.rho)) throw Error(ErrorKind::Positivity, "rk4 update: density lost positivity");
  require_finite(out.phi, "rk4 update potential");
  check_mass_conserved(s.rho, out.rho, "rk4");
  return out;
}

namespace {

// One implicit midpoint step; returns false if the fixed-point map diverges.
bool midpoint_attempt(const DualState& s, const EnergyFunctional& F, double dt, const MidpointOptions& opt,
                      DualState& result) {
  DualState z = s;
  double previous = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int it = 0; it < opt.max_iters; ++it) {
    DualState mid{0.5 * (s.rho + z.rho), 0.5 * (s.phi + z.phi)};
    if (!all_positive(mid.rho)) return false;
    const DualRhs k = rhs_dual(mid, F);
    DualState next = combine(s, dt, k);
    remove_mean(next.phi);
    if (!all_finite(next.rho) || !all_finite(next.phi)) return false;

    const double change = std::max(max_abs(next.rho - z.rho), max_abs(next.phi - z.phi));
    const double scale = std::max({1.0, max_abs(next.rho), max_abs(next.phi)});
    z = std::move(next);
    if (change <= opt.tol * scale) {
      result = std::move(z);
      return true;
    }
    growth = change > previous ? growth + 1 : 0;
    if (growth >= 3) return false;
    previous = change;
  }
  return false;
}

DualState midpoint_recursive(const DualState& s, const EnergyFunctional& F, double dt, const MidpointOptions& opt,
                             int depth) {
  DualState out = s;
  if (midpoint_attempt(s, F, dt, opt, out)) return out;
  if (depth >= opt.max_halvings) {
    throw Error(ErrorKind::SolverDivergence,
                "implicit midpoint: fixed-point iteration diverged at dt = " + format_double(dt) +
                    " after " + std::to_string(depth) + " halvings");
  }
  const DualState half = midpoint_recursive(s, F, 0.5 * dt, opt, depth + 1);
  return midpoint_recursive(half, F, 0.5 * dt, opt, depth + 1);
}

}  // namespace

DualState step_midpoint(const DualState& s, const EnergyFunctional& F, double dt, const MidpointOptions& options) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  require_positive(s.rho, "density");
  DualState out = midpoint_recursive(s, F, dt, options, 0);
  if (!all_positive(out.rho)) throw Error(ErrorKind::Positivity, "midpoint update: density lost positivity");
  check_mass_conserved(s.rho, out.rho, "midpoint");
  return out;
}

ScalarField christoffel_term(const PrimalState& p, double tol) {
  const ScalarField phi = pseudo_inverse(p.rho, p.rho_dot, tol);
  ScalarField out = WeightedLaplacian::signed_weight(p.rho_dot.field()).apply(phi);
  out.add_scaled(-0.5, WeightedLaplacian(p.rho).apply(squared_norm_at_cells(gradient(phi))));
  return out;
}

DiagnosticsRow diagnose(double t, const DualState& s, const EnergyFunctional& F, int cg_iters) {
  DiagnosticsRow row;
  row.t = t;
  row.kinetic = kinetic_energy(s);
  row.potential = evaluate(F, s.rho);
  row.hamiltonian = row.kinetic + row.potential;
  row.mass = integrate(s.rho);
  row.min_rho = min_value(s.rho);
  row.cg_iters = cg_iters;
  return row;
}

void Trajectory::append(double t, DualState s, const EnergyFunctional& F, int cg_iters) {
  if (!times.empty() && !(t > times.back())) {
    throw Error(ErrorKind::InvalidArgument, "trajectory times must be strictly increasing");
  }
  diagnostics.push_back(diagnose(t, s, F, cg_iters));
  times.push_back(t);
  states.push_back(std::move(s));
}

Trajectory integrate(const DualState& initial, const EnergyFunctional& F, const IntegrationOptions& options) {
  check_state(initial);
  if (options.steps < 0) throw Error(ErrorKind::InvalidArgument, "step count must be nonnegative");
  Trajectory traj;
  traj.dt = options.dt;
  traj.states.reserve(options.steps + 1);
  traj.append(0.0, initial, F);
  DualState s = initial;
  for (int k = 1; k <= options.steps; ++k) {
    const double t = k * options.dt;
    try {
      s = options.method == Integrator::Rk4 ? step_rk4(s, F, options.dt)
                                            : step_midpoint(s, F, options.dt, options.midpoint);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " (at t = " + format_double(t) + ")");
    }
    traj.append(t, s, F);
  }
  return traj;
}

double primal_residual(const Trajectory& traj, const EnergyFunctional& F, std::size_t k, double tol) {
  if (k < 1 || k + 1 >= traj.size()) {
    throw Error(ErrorKind::InvalidArgument, "primal_residual: index " + std::to_string(k) + " outside [1, " +
                                                std::to_string(traj.size() == 0 ? 0 : traj.size() - 2) + "]");
  }
  const double dt = traj.dt;
  const ScalarField& prev = traj.states[k - 1].rho;
  const ScalarField& cur = traj.states[k].rho;
  const ScalarField& next = traj.states[k + 1].rho;

  ScalarField rho_dot = next - prev;
  rho_dot *= 1.0 / (2.0 * dt);
  ScalarField rho_ddot = next - 2.0 * cur + prev;
  rho_ddot *= 1.0 / (dt * dt);

  const PrimalState p{cur, TangentVector::project(std::move(rho_dot))};
  ScalarField r = rho_ddot + christoffel_term(p, tol);
  if (!F.empty()) r += wasserstein_gradient(F, cur).field();
  return max_abs(r);
}

double action(const Trajectory& traj, const EnergyFunctional& F, double tol) {
  if (traj.size() < 3) throw Error(ErrorKind::InvalidArgument, "action needs at least 3 trajectory nodes");
  double sum = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double w = (k == 0 || k + 1 == traj.size()) ? 0.5 : 1.0;
    sum += w * lagrangian(legendre_to_primal(traj.states[k]), F, tol);
  }
  return sum * traj.dt;
}

GeodesicEnergy geodesic_energy(const Trajectory& traj, double tol) {
  if (traj.size() < 2) throw Error(ErrorKind::InvalidArgument, "geodesic_energy needs at least 2 nodes");
  std::vector<double> e(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const PrimalState p = legendre_to_primal(traj.states[k]);
    e[k] = metric_primal(p.rho, p.rho_dot, p.rho_dot, tol);
  }
  GeodesicEnergy out;
  double mean_e = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double w = (k == 0 || k + 1 == e.size()) ? 0.5 : 1.0;
    out.energy += w * e[k] * traj.dt;
    mean_e += e[k];
  }
  mean_e /= static_cast<double>(e.size());
  double dev = 0.0;
  for (double v : e) dev = std::max(dev, std::abs(v - mean_e));
  out.max_relative_deviation = mean_e != 0.0 ? dev / std::abs(mean_e) : dev;
  return out;
}

void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << "t,hamiltonian,kinetic,potential,mass,min_rho,cg_iters\n";
  for (const auto& r : traj.diagnostics) {
    out << format_double(r.t) << ',' << format_double(r.hamiltonian) << ',' << format_double(r.kinetic) << ','
        << format_double(r.potential) << ',' << format_double(r.mass) << ',' << format_double(r.min_rho) << ','
        << r.cg_iters << '\n';
  }
}

}  // namespace whf
