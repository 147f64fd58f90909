#include "whf/particles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "whf/error.hpp"
#include "whf/io.hpp"

namespace whf {

namespace {

double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

double wrap(double x) {
  x -= std::floor(x);
  return x >= 1.0 ? 0.0 : x;
}

struct Stencil {
  std::array<std::size_t, 4> cells{};
  std::array<double, 4> weights{};
  int count = 0;
};

// Cloud-in-cell weights on a lattice with nodes at (k + shift_a) * h.
Stencil cic(const Grid& g, std::array<double, 2> x, std::array<double, 2> shift = {0.0, 0.0}) {
  const int n = g.n();
  std::array<int, 2> lo{0, 0};
  std::array<double, 2> frac{0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) {
    const double s = x[a] * n - shift[a];
    const double f = std::floor(s);
    lo[a] = static_cast<int>(f);
    frac[a] = s - f;
  }
  Stencil st;
  const int corners = g.dim() == 1 ? 2 : 4;
  for (int c = 0; c < corners; ++c) {
    std::array<int, 2> idx{0, 0};
    double w = 1.0;
    for (int a = 0; a < g.dim(); ++a) {
      const int bit = (c >> a) & 1;
      idx[a] = ((lo[a] + bit) % n + n) % n;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    st.cells[st.count] = g.flat(idx);
    st.weights[st.count] = w;
    ++st.count;
  }
  return st;
}

std::array<double, 2> particle_position(const ParticleEnsemble& e, std::size_t i) {
  std::array<double, 2> x{0.0, 0.0};
  for (int a = 0; a < e.dim; ++a) x[a] = e.positions[i * e.dim + a];
  return x;
}

std::vector<double> sample_1d(const ScalarField& rho, std::size_t count, std::mt19937_64& gen) {
  const Grid& g = rho.grid;
  const double h = g.spacing();
  const int n = g.n();
  std::vector<double> cumulative(n + 1, 0.0);
  for (int j = 0; j < n; ++j) cumulative[j + 1] = cumulative[j] + 0.5 * h * (rho[j] + rho[(j + 1) % n]);
  const double total = cumulative[n];

  std::vector<double> out(count);
  for (auto& x : out) {
    const double target = uniform01(gen) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    const int j = std::clamp(static_cast<int>(it - cumulative.begin()) - 1, 0, n - 1);
    const double r = target - cumulative[j];
    const double a = (rho[(j + 1) % n] - rho[j]) / (2.0 * h);
    const double b = rho[j];
    const double s = 2.0 * r / (b + std::sqrt(std::max(0.0, b * b + 4.0 * a * r)));
    x = wrap(j * h + std::clamp(s, 0.0, h));
  }
  return out;
}

std::vector<double> sample_2d(const ScalarField& rho, std::size_t count, std::mt19937_64& gen) {
  const double peak = *std::max_element(rho.values.begin(), rho.values.end());
  const std::size_t cap = 1000 * count + 1000;
  std::vector<double> out;
  out.reserve(2 * count);
  std::size_t attempts = 0;
  while (out.size() < 2 * count) {
    if (++attempts > cap) {
      throw Error(ErrorKind::InvalidArgument,
                  "rejection sampling exceeded " + std::to_string(cap) + " attempts (density too peaked)");
    }
    const std::array<double, 2> x{uniform01(gen), uniform01(gen)};
    if (uniform01(gen) * peak < interpolate_cells(rho.grid, rho.values, x)) {
      out.push_back(x[0]);
      out.push_back(x[1]);
    }
  }
  return out;
}

std::vector<double> gather(const Grid& g, const std::array<std::vector<double>, 2>& field, const ParticleEnsemble& e,
                           double scale) {
  std::vector<double> acc(e.positions.size(), 0.0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Stencil st = cic(g, particle_position(e, i));
    for (int a = 0; a < e.dim; ++a) {
      double s = 0.0;
      for (int c = 0; c < st.count; ++c) s += st.weights[c] * field[a][st.cells[c]];
      acc[i * e.dim + a] = scale * s;
    }
  }
  return acc;
}

}  // namespace

ParticleEnsemble init_from_density(const ScalarField& rho0, const ScalarField& phi0, std::size_t count,
                                   std::uint64_t seed) {
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "ensemble needs at least one particle");
  require_positive(rho0, "initial density");
  require_same_grid(rho0.grid, phi0.grid, "init_from_density");
  std::mt19937_64 gen(seed);
  ParticleEnsemble e;
  e.dim = rho0.grid.dim();
  e.positions = e.dim == 1 ? sample_1d(rho0, count, gen) : sample_2d(rho0, count, gen);
  e.velocities.assign(e.positions.size(), 0.0);
  const VectorField grad = gradient(phi0);
  for (std::size_t i = 0; i < count; ++i) {
    const auto x = particle_position(e, i);
    for (int a = 0; a < e.dim; ++a) e.velocities[i * e.dim + a] = interpolate_faces(grad, a, x);
  }
  return e;
}

Force analytic_force(std::function<std::array<double, 2>(std::array<double, 2>)> grad_potential, double coefficient) {
  return [grad_potential = std::move(grad_potential), coefficient](double, const ParticleEnsemble& e) {
    std::vector<double> acc(e.positions.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      const auto g = grad_potential(particle_position(e, i));
      for (int a = 0; a < e.dim; ++a) acc[i * e.dim + a] = -coefficient * g[a];
    }
    return acc;
  };
}

Force potential_force(const ScalarField& potential, double coefficient) {
  return [grid = potential.grid, g = centered_gradient(potential), coefficient](double, const ParticleEnsemble& e) {
    return gather(grid, g, e, -coefficient);
  };
}

Force mean_field_force(EnergyFunctional F, const Grid& grid, bool smooth) {
  return [F = std::move(F), grid, smooth](double, const ParticleEnsemble& e) {
    ScalarField density = push_forward(e, grid);
    if (smooth) density = smooth_nearest_neighbor(density);
    const ScalarField variation = first_variation(F, density);
    return gather(grid, centered_gradient(variation), e, -1.0);
  };
}

ParticleEnsemble step_particles(const ParticleEnsemble& e, const Force& force, double t, double dt) {
  ParticleEnsemble out = e;
  evolve_particles(out, force, t, dt, 1);
  return out;
}

void evolve_particles(ParticleEnsemble& e, const Force& force, double t0, double dt, int steps) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "particle time step must be positive");
  if (steps <= 0) return;
  std::vector<double> acc = force(t0, e);
  for (int k = 0; k < steps; ++k) {
    for (std::size_t i = 0; i < e.velocities.size(); ++i) {
      e.velocities[i] += 0.5 * dt * acc[i];
      e.positions[i] = wrap(e.positions[i] + dt * e.velocities[i]);
    }
    acc = force(t0 + (k + 1) * dt, e);
    for (std::size_t i = 0; i < e.velocities.size(); ++i) e.velocities[i] += 0.5 * dt * acc[i];
  }
}

ScalarField push_forward(const ParticleEnsemble& e, const Grid& grid) {
  if (e.dim != grid.dim()) throw Error(ErrorKind::InvalidArgument, "ensemble and grid dimensions differ");
  ScalarField out(grid);
  double total = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Stencil st = cic(grid, particle_position(e, i));
    for (int c = 0; c < st.count; ++c) {
      out[st.cells[c]] += st.weights[c];
      total += st.weights[c];
    }
  }
  out *= 1.0 / (total * grid.cell_volume());
  return out;
}

ScalarField smooth_nearest_neighbor(const ScalarField& f) {
  ScalarField out = f;
  for (int a = 0; a < f.grid.dim(); ++a) {
    ScalarField next(f.grid);
    for (std::size_t j = 0; j < f.size(); ++j) {
      next[j] = 0.25 * out[f.grid.neighbor(j, a, -1)] + 0.5 * out[j] + 0.25 * out[f.grid.neighbor(j, a, 1)];
    }
    out = std::move(next);
  }
  return out;
}

double compare_densities(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "compare_densities");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * a.grid.cell_volume();
}

std::array<double, 2> mean_momentum(const ParticleEnsemble& e) {
  std::array<double, 2> p{0.0, 0.0};
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (int a = 0; a < e.dim; ++a) p[a] += e.velocities[i * e.dim + a];
  }
  for (auto& v : p) v /= static_cast<double>(e.size());
  return p;
}

double interpolate_cells(const Grid& grid, const std::vector<double>& values, std::array<double, 2> x) {
  const Stencil st = cic(grid, x);
  double s = 0.0;
  for (int c = 0; c < st.count; ++c) s += st.weights[c] * values[st.cells[c]];
  return s;
}

double interpolate_faces(const VectorField& v, int axis, std::array<double, 2> x) {
  std::array<double, 2> shift{0.0, 0.0};
  shift[axis] = 0.5;
  const Stencil st = cic(v.grid, x, shift);
  double s = 0.0;
  for (int c = 0; c < st.count; ++c) s += st.weights[c] * v.components[axis][st.cells[c]];
  return s;
}

void write_ensemble_csv(const std::filesystem::path& path, const ParticleEnsemble& e) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << (e.dim == 1 ? "x,vx\n" : "x,y,vx,vy\n");
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (int a = 0; a < e.dim; ++a) out << format_double(e.positions[i * e.dim + a]) << ',';
    for (int a = 0; a < e.dim; ++a) {
      out << format_double(e.velocities[i * e.dim + a]) << (a + 1 < e.dim ? "," : "\n");
    }
  }
}

}  // namespace whf
