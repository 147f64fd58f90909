#pragma once

#include "whf/grid.hpp"
#include "whf/spectral.hpp"

namespace whf {

/// Relative residual used when callers do not pass one.
inline constexpr double kDefaultSolverTol = 1e-10;

/// A zero-mass scalar field, i.e. an element of the tangent space at a
/// density. Construction checks |integrate(sigma)| against a rounding-level
/// tolerance scaled by the field magnitude.
class TangentVector {
 public:
  explicit TangentVector(ScalarField sigma);

  /// Removes the mean instead of checking it.
  static TangentVector project(ScalarField f);
  static TangentVector zero(const Grid& g) { return TangentVector(ScalarField(g)); }

  const ScalarField& field() const noexcept { return sigma_; }
  const Grid& grid() const noexcept { return sigma_.grid; }

 private:
  struct Unchecked {};
  TangentVector(ScalarField sigma, Unchecked) : sigma_(std::move(sigma)) {}
  ScalarField sigma_;
};

/// Throws ErrorKind::Positivity naming `what` if any cell is <= 0 or NaN.
void require_positive(const ScalarField& rho, const char* what);

/// Delta_w = div(w_faces grad .), with w_faces the arithmetic face average of
/// the cell weights w. Immutable after construction.
class WeightedLaplacian {
 public:
  /// Density weight: rejects any nonpositive cell.
  explicit WeightedLaplacian(const ScalarField& rho);

  /// Signed weight (e.g. a tangent vector); no positivity requirement.
  static WeightedLaplacian signed_weight(const ScalarField& w);

  ScalarField apply(const ScalarField& phi) const;
  const VectorField& face_weights() const noexcept { return faces_; }
  const Grid& grid() const noexcept { return faces_.grid; }

 private:
  explicit WeightedLaplacian(VectorField faces) : faces_(std::move(faces)) {}
  VectorField faces_;
};

/// Delta_rho phi = div(rho_faces grad phi); rho must be strictly positive.
TangentVector apply_laplacian(const ScalarField& rho, const ScalarField& phi);

/// Delta_w phi with a signed weight w.
TangentVector apply_laplacian_with_weight(const ScalarField& weight, const ScalarField& phi);

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// (-Delta_rho)^dagger by preconditioned conjugate gradients on the zero-mean
/// subspace. The preconditioner is the constant-coefficient Laplacian scaled
/// by the mean face weight, inverted with an FFT.
class PseudoInverse {
 public:
  explicit PseudoInverse(const ScalarField& rho);

  /// Zero-mean phi with -Delta_rho phi = sigma to relative residual `tol`.
  /// Throws ErrorKind::IterationLimit after 10 * cells iterations.
  ScalarField solve(const TangentVector& sigma, double tol = kDefaultSolverTol,
                    SolveStats* stats = nullptr) const;

  const WeightedLaplacian& laplacian() const noexcept { return op_; }

 private:
  WeightedLaplacian op_;
  Spectral spectral_;
  double mean_weight_;
};

ScalarField pseudo_inverse(const ScalarField& rho, const TangentVector& sigma,
                           double tol = kDefaultSolverTol, SolveStats* stats = nullptr);

/// g_W in dual coordinates: sum over faces of rho_f grad(phi1) grad(phi2) dV.
/// Exactly symmetric in phi1, phi2.
double metric_dual(const ScalarField& rho, const ScalarField& phi1, const ScalarField& phi2);

/// g_W in primal coordinates: inner(sigma1, (-Delta_rho)^dagger sigma2).
double metric_primal(const ScalarField& rho, const TangentVector& sigma1, const TangentVector& sigma2,
                     double tol = kDefaultSolverTol);

/// Max-norm gap between the centred finite difference in eps of
/// (-Delta_{rho + eps h})^dagger sigma and the closed form
/// -(-Delta_rho)^dagger (-Delta_h) (-Delta_rho)^dagger sigma.
double pseudo_inverse_derivative_check(const ScalarField& rho, const TangentVector& h_dir,
                                       const TangentVector& sigma, double eps, double tol = 1e-14);

}  // namespace whf
