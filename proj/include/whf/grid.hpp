#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace whf {

/// Periodic uniform grid on the unit torus [0,1)^d, d in {1, 2}.
///
/// Cell j sits at x_j = j * h along each axis, h = 1 / n. Cells are stored
/// row-major: in 2D the flat index of (i0, i1) is i0 * n + i1, so axis 1 is
/// the fastest-varying one.
class Grid {
 public:
  static constexpr int kMinCells = 4;

  Grid(int dim, int n);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  double spacing() const noexcept { return 1.0 / n_; }
  double cell_volume() const noexcept { return dim_ == 1 ? spacing() : spacing() * spacing(); }

  /// Per-axis index of a flat cell index. Unused axes are zero.
  std::array<int, 2> coords(std::size_t cell) const noexcept;
  std::size_t flat(std::array<int, 2> coords) const noexcept;

  /// Periodic neighbour of `cell` shifted by `offset` cells along `axis`.
  std::size_t neighbor(std::size_t cell, int axis, int offset) const noexcept;

  /// Cell centre coordinates on the torus.
  std::array<double, 2> center(std::size_t cell) const noexcept;

  /// Index of the cell at the negated offset, i.e. the reflection x -> -x.
  std::size_t reflect(std::size_t cell) const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_;
  int n_;
  std::size_t size_;
};

/// Real values, one per cell.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  ScalarField(const Grid& g, std::vector<double> v);

  static ScalarField from_function(const Grid& g,
                                   const std::function<double(std::array<double, 2>)>& f);

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  ScalarField& add_scaled(double s, const ScalarField& o);
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator-(ScalarField a);

/// Staggered vector field: component a lives on the face between cell j and
/// j + e_a and is stored at index j.
struct VectorField {
  Grid grid;
  std::array<std::vector<double>, 2> components;

  explicit VectorField(const Grid& g);

  std::span<double> component(int axis) { return components[axis]; }
  std::span<const double> component(int axis) const { return components[axis]; }
};

/// Forward-difference staggered gradient: (f[j + e_a] - f[j]) / h on face (j, a).
VectorField gradient(const ScalarField& f);

/// Backward-difference divergence, the exact negative adjoint of `gradient`.
ScalarField divergence(const VectorField& v);

double integrate(const ScalarField& f);
double inner(const ScalarField& f, const ScalarField& g);

/// sum over faces of u . v, times the cell volume.
double face_inner(const VectorField& u, const VectorField& v);

/// Arithmetic mean of the two cells adjacent to each face.
VectorField face_average(const ScalarField& f);

/// Cell-centred |v|^2: per axis, the mean of the squares on the two faces
/// bounding the cell, summed over axes.
ScalarField squared_norm_at_cells(const VectorField& v);

/// Face-wise product w * v.
VectorField multiply(const VectorField& w, const VectorField& v);

/// Centred cell gradient (f[j + e_a] - f[j - e_a]) / 2h, i.e. the average of
/// the two face gradients bounding the cell. Component a is cell-centred.
std::array<std::vector<double>, 2> centered_gradient(const ScalarField& f);

/// Unweighted 2d+1 point Laplacian, divergence(gradient(f)).
ScalarField laplacian(const ScalarField& f);

double mean(const ScalarField& f);
void remove_mean(ScalarField& f);
double max_abs(const ScalarField& f);
double min_value(const ScalarField& f);
double l2_norm(const ScalarField& f);

/// Throws if any value is NaN or infinite. `what` names the quantity.
void require_finite(const ScalarField& f, const char* what);

/// Throws ErrorKind::InvalidArgument if grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* where);

/// Cyclic shift by `offset` cells along `axis`: out[j] = f[j - offset e_a].
ScalarField shift(const ScalarField& f, int axis, int offset);

}  // namespace whf
