#include "whf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "whf/error.hpp"

namespace whf {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Positivity: return "positivity";
    case ErrorKind::IterationLimit: return "iteration-limit";
    case ErrorKind::SolverDivergence: return "solver-divergence";
    case ErrorKind::TimeStep: return "time-step";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Grid::Grid(int dim, int n) : dim_(dim), n_(n) {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorKind::InvalidArgument, "grid dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (n < kMinCells) {
    throw Error(ErrorKind::InvalidArgument,
                "grid needs at least " + std::to_string(kMinCells) + " cells per axis, got " + std::to_string(n));
  }
  size_ = dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
}

std::array<int, 2> Grid::coords(std::size_t cell) const noexcept {
  if (dim_ == 1) return {static_cast<int>(cell), 0};
  return {static_cast<int>(cell / n_), static_cast<int>(cell % n_)};
}

std::size_t Grid::flat(std::array<int, 2> c) const noexcept {
  if (dim_ == 1) return static_cast<std::size_t>(c[0]);
  return static_cast<std::size_t>(c[0]) * n_ + c[1];
}

std::size_t Grid::neighbor(std::size_t cell, int axis, int offset) const noexcept {
  auto c = coords(cell);
  int k = (c[axis] + offset) % n_;
  if (k < 0) k += n_;
  c[axis] = k;
  return flat(c);
}

std::array<double, 2> Grid::center(std::size_t cell) const noexcept {
  auto c = coords(cell);
  return {c[0] * spacing(), dim_ == 2 ? c[1] * spacing() : 0.0};
}

std::size_t Grid::reflect(std::size_t cell) const noexcept {
  auto c = coords(cell);
  for (int a = 0; a < dim_; ++a) c[a] = (n_ - c[a]) % n_;
  return flat(c);
}

ScalarField::ScalarField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) {
    throw Error(ErrorKind::InvalidArgument, "field has " + std::to_string(values.size()) +
                                                " values but grid has " + std::to_string(g.size()) + " cells");
  }
}

ScalarField ScalarField::from_function(const Grid& g,
                                       const std::function<double(std::array<double, 2>)>& f) {
  ScalarField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g.center(i));
  return out;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid, o.grid, "field addition");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid, o.grid, "field subtraction");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (auto& v : values) v *= s;
  return *this;
}

ScalarField& ScalarField::add_scaled(double s, const ScalarField& o) {
  require_same_grid(grid, o.grid, "add_scaled");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += s * o.values[i];
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }

VectorField::VectorField(const Grid& g) : grid(g) {
  for (int a = 0; a < g.dim(); ++a) components[a].assign(g.size(), 0.0);
}

VectorField gradient(const ScalarField& f) {
  const Grid& g = f.grid;
  VectorField out(g);
  const double inv_h = 1.0 / g.spacing();
  for (int a = 0; a < g.dim(); ++a) {
    auto& c = out.components[a];
    for (std::size_t j = 0; j < g.size(); ++j) c[j] = (f[g.neighbor(j, a, 1)] - f[j]) * inv_h;
  }
  return out;
}

ScalarField divergence(const VectorField& v) {
  const Grid& g = v.grid;
  ScalarField out(g);
  const double inv_h = 1.0 / g.spacing();
  for (int a = 0; a < g.dim(); ++a) {
    const auto& c = v.components[a];
    for (std::size_t j = 0; j < g.size(); ++j) out[j] += (c[j] - c[g.neighbor(j, a, -1)]) * inv_h;
  }
  return out;
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid, g.grid, "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * f.grid.cell_volume();
}

double face_inner(const VectorField& u, const VectorField& v) {
  require_same_grid(u.grid, v.grid, "face_inner");
  double s = 0.0;
  for (int a = 0; a < u.grid.dim(); ++a) {
    const auto& x = u.components[a];
    const auto& y = v.components[a];
    for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
  }
  return s * u.grid.cell_volume();
}

VectorField face_average(const ScalarField& f) {
  const Grid& g = f.grid;
  VectorField out(g);
  for (int a = 0; a < g.dim(); ++a) {
    auto& c = out.components[a];
    for (std::size_t j = 0; j < g.size(); ++j) c[j] = 0.5 * (f[j] + f[g.neighbor(j, a, 1)]);
  }
  return out;
}

ScalarField squared_norm_at_cells(const VectorField& v) {
  const Grid& g = v.grid;
  ScalarField out(g);
  for (int a = 0; a < g.dim(); ++a) {
    const auto& c = v.components[a];
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double lo = c[g.neighbor(j, a, -1)];
      out[j] += 0.5 * (lo * lo + c[j] * c[j]);
    }
  }
  return out;
}

VectorField multiply(const VectorField& w, const VectorField& v) {
  require_same_grid(w.grid, v.grid, "multiply");
  VectorField out(v.grid);
  for (int a = 0; a < v.grid.dim(); ++a) {
    for (std::size_t j = 0; j < v.grid.size(); ++j) {
      out.components[a][j] = w.components[a][j] * v.components[a][j];
    }
  }
  return out;
}

std::array<std::vector<double>, 2> centered_gradient(const ScalarField& f) {
  const Grid& g = f.grid;
  std::array<std::vector<double>, 2> out;
  const double inv_2h = 0.5 / g.spacing();
  for (int a = 0; a < g.dim(); ++a) {
    out[a].resize(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      out[a][j] = (f[g.neighbor(j, a, 1)] - f[g.neighbor(j, a, -1)]) * inv_2h;
    }
  }
  return out;
}

ScalarField laplacian(const ScalarField& f) { return divergence(gradient(f)); }

double mean(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s / static_cast<double>(f.size());
}

void remove_mean(ScalarField& f) {
  const double m = mean(f);
  for (auto& v : f.values) v -= m;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double min_value(const ScalarField& f) { return *std::min_element(f.values.begin(), f.values.end()); }

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

void require_finite(const ScalarField& f, const char* what) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) {
      throw Error(ErrorKind::InvalidArgument,
                  std::string(what) + " has a non-finite value at cell " + std::to_string(i));
    }
  }
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) throw Error(ErrorKind::InvalidArgument, std::string(where) + ": fields live on different grids");
}

ScalarField shift(const ScalarField& f, int axis, int offset) {
  ScalarField out(f.grid);
  for (std::size_t j = 0; j < f.size(); ++j) out[f.grid.neighbor(j, axis, offset)] = f[j];
  return out;
}

}  // namespace whf
