#include "whf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "whf/error.hpp"

namespace whf {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void subtract_mean(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  s /= static_cast<double>(v.size());
  for (double& x : v) x -= s;
}

}  // namespace

TangentVector::TangentVector(ScalarField sigma) : sigma_(std::move(sigma)) {
  const double mass = integrate(sigma_);
  const double scale = std::max(1.0, max_abs(sigma_));
  if (std::abs(mass) > 1e-12 * scale) {
    throw Error(ErrorKind::InvalidArgument,
                "tangent vector must have zero integral, got " + std::to_string(mass));
  }
}

TangentVector TangentVector::project(ScalarField f) {
  remove_mean(f);
  return TangentVector(std::move(f), Unchecked{});
}

void require_positive(const ScalarField& rho, const char* what) {
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) {
      throw Error(ErrorKind::Positivity, std::string(what) + " is not strictly positive at cell " +
                                             std::to_string(i) + " (value " + std::to_string(rho[i]) + ")");
    }
  }
}

WeightedLaplacian::WeightedLaplacian(const ScalarField& rho) : faces_(rho.grid) {
  require_positive(rho, "density");
  faces_ = face_average(rho);
}

WeightedLaplacian WeightedLaplacian::signed_weight(const ScalarField& w) { return WeightedLaplacian(face_average(w)); }

ScalarField WeightedLaplacian::apply(const ScalarField& phi) const {
  require_same_grid(grid(), phi.grid, "weighted Laplacian");
  return divergence(multiply(faces_, gradient(phi)));
}

TangentVector apply_laplacian(const ScalarField& rho, const ScalarField& phi) {
  return TangentVector(WeightedLaplacian(rho).apply(phi));
}

TangentVector apply_laplacian_with_weight(const ScalarField& weight, const ScalarField& phi) {
  return TangentVector(WeightedLaplacian::signed_weight(weight).apply(phi));
}

PseudoInverse::PseudoInverse(const ScalarField& rho) : op_(rho), spectral_(rho.grid), mean_weight_(0.0) {
  const auto& faces = op_.face_weights();
  double s = 0.0;
  std::size_t count = 0;
  for (int a = 0; a < rho.grid.dim(); ++a) {
    for (double w : faces.components[a]) s += w;
    count += faces.components[a].size();
  }
  mean_weight_ = s / static_cast<double>(count);
}

ScalarField PseudoInverse::solve(const TangentVector& sigma, double tol, SolveStats* stats) const {
  const Grid& g = op_.grid();
  require_same_grid(g, sigma.grid(), "pseudo_inverse");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "pseudo_inverse tolerance must be positive");

  const std::size_t n = g.size();
  std::vector<double> b = sigma.field().values;
  subtract_mean(b);
  ScalarField x(g);
  const double b_norm = std::sqrt(dot(b, b));
  if (stats) *stats = {};
  if (b_norm == 0.0) return x;

  std::vector<Spectral::Complex> buf(n);
  auto precondition = [&](const std::vector<double>& r, std::vector<double>& z) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = r[i];
    spectral_.forward(buf);
    buf[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) buf[i] /= mean_weight_ * spectral_.discrete_k2(i);
    spectral_.inverse(buf);
    for (std::size_t i = 0; i < n; ++i) z[i] = buf[i].real();
    subtract_mean(z);
  };

  std::vector<double> r = b, z(n), q(n);
  precondition(r, z);
  std::vector<double> p = z;
  double rz = dot(r, z);
  ScalarField p_field(g);
  const int cap = static_cast<int>(10 * n);
  for (int it = 1; it <= cap; ++it) {
    p_field.values = p;
    const ScalarField ap = op_.apply(p_field);
    for (std::size_t i = 0; i < n; ++i) q[i] = -ap[i];
    const double alpha = rz / dot(p, q);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    subtract_mean(r);
    const double rel = std::sqrt(dot(r, r)) / b_norm;
    if (rel <= tol) {
      remove_mean(x);
      if (stats) *stats = {it, rel};
      return x;
    }
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw Error(ErrorKind::IterationLimit, "pseudo_inverse: no convergence to relative residual " +
                                             std::to_string(tol) + " within " + std::to_string(cap) +
                                             " iterations (near-degenerate density or tolerance too tight)");
}

ScalarField pseudo_inverse(const ScalarField& rho, const TangentVector& sigma, double tol, SolveStats* stats) {
  return PseudoInverse(rho).solve(sigma, tol, stats);
}

double metric_dual(const ScalarField& rho, const ScalarField& phi1, const ScalarField& phi2) {
  const WeightedLaplacian op(rho);
  const auto g1 = gradient(phi1);
  const auto g2 = gradient(phi2);
  const auto& w = op.face_weights();
  double s = 0.0;
  for (int a = 0; a < rho.grid.dim(); ++a) {
    for (std::size_t j = 0; j < rho.size(); ++j) {
      s += w.components[a][j] * (g1.components[a][j] * g2.components[a][j]);
    }
  }
  return s * rho.grid.cell_volume();
}

double metric_primal(const ScalarField& rho, const TangentVector& sigma1, const TangentVector& sigma2, double tol) {
  return inner(sigma1.field(), pseudo_inverse(rho, sigma2, tol));
}

double pseudo_inverse_derivative_check(const ScalarField& rho, const TangentVector& h_dir,
                                       const TangentVector& sigma, double eps, double tol) {
  ScalarField plus = rho;
  plus.add_scaled(eps, h_dir.field());
  ScalarField minus = rho;
  minus.add_scaled(-eps, h_dir.field());
  require_positive(plus, "rho + eps h");
  require_positive(minus, "rho - eps h");

  ScalarField fd = pseudo_inverse(plus, sigma, tol) - pseudo_inverse(minus, sigma, tol);
  fd *= 1.0 / (2.0 * eps);

  const PseudoInverse base(rho);
  const ScalarField phi = base.solve(sigma, tol);
  // -Delta_h phi
  ScalarField w = WeightedLaplacian::signed_weight(h_dir.field()).apply(phi);
  w *= -1.0;
  ScalarField analytic = base.solve(TangentVector::project(std::move(w)), tol);
  analytic *= -1.0;

  return max_abs(fd - analytic);
}

}  // namespace whf
