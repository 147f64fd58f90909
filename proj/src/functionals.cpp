#include "whf/functionals.hpp"

#include <cmath>
#include <string>

#include "whf/error.hpp"
#include "whf/spectral.hpp"

namespace whf {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Flat index of the offset x_i - x_j.
std::size_t offset_index(const Grid& g, std::size_t i, std::size_t j) {
  const auto ci = g.coords(i);
  const auto cj = g.coords(j);
  std::array<int, 2> d{0, 0};
  for (int a = 0; a < g.dim(); ++a) d[a] = ((ci[a] - cj[a]) % g.n() + g.n()) % g.n();
  return g.flat(d);
}

ScalarField log_field(const ScalarField& rho) {
  ScalarField out(rho.grid);
  for (std::size_t i = 0; i < rho.size(); ++i) out[i] = std::log(rho[i]);
  return out;
}

}  // namespace

Interaction::Interaction(ScalarField kernel, InteractionMethod method)
    : kernel_(std::move(kernel)), method_(method) {
  require_finite(kernel_, "interaction kernel");
  const double scale = std::max(1.0, max_abs(kernel_));
  for (std::size_t m = 0; m < kernel_.size(); ++m) {
    if (std::abs(kernel_[m] - kernel_[kernel_.grid.reflect(m)]) > 1e-12 * scale) {
      throw Error(ErrorKind::InvalidArgument,
                  "interaction kernel must be even (W(x) == W(-x)); violated at offset " + std::to_string(m));
    }
  }
}

ScalarField Interaction::convolve(const ScalarField& rho) const {
  const Grid& g = rho.grid;
  require_same_grid(g, kernel_.grid, "interaction");
  const double dv = g.cell_volume();
  ScalarField out(g);
  if (method_ == InteractionMethod::Direct) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) s += kernel_[offset_index(g, i, j)] * rho[j];
      out[i] = s * dv;
    }
    return out;
  }
  const Spectral spectral(g);
  std::vector<Spectral::Complex> k(kernel_.values.begin(), kernel_.values.end());
  std::vector<Spectral::Complex> r(rho.values.begin(), rho.values.end());
  spectral.forward(k);
  spectral.forward(r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= k[i];
  spectral.inverse(r);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = r[i].real() * dv;
  return out;
}

EnergyFunctional EnergyFunctional::linear(ScalarField potential, double coefficient) {
  EnergyFunctional f;
  f.add(LinearPotential{std::move(potential)}, coefficient);
  return f;
}

EnergyFunctional EnergyFunctional::interaction(ScalarField kernel, double coefficient, InteractionMethod method) {
  EnergyFunctional f;
  f.add(Interaction(std::move(kernel), method), coefficient);
  return f;
}

EnergyFunctional EnergyFunctional::fisher(double coefficient) {
  EnergyFunctional f;
  f.add(FisherInformation{}, coefficient);
  return f;
}

EnergyFunctional& EnergyFunctional::add(EnergyKind kind, double coefficient) {
  if (!std::isfinite(coefficient)) throw Error(ErrorKind::InvalidArgument, "energy coefficient must be finite");
  terms_.push_back({std::move(kind), coefficient});
  return *this;
}

EnergyFunctional EnergyFunctional::operator-() const {
  EnergyFunctional f = *this;
  for (auto& t : f.terms_) t.coefficient = -t.coefficient;
  return f;
}

double fisher_information(const ScalarField& rho) {
  require_positive(rho, "density (Fisher information)");
  const auto g = gradient(log_field(rho));
  const auto w = face_average(rho);
  double s = 0.0;
  for (int a = 0; a < rho.grid.dim(); ++a) {
    for (std::size_t j = 0; j < rho.size(); ++j) {
      const double gj = g.components[a][j];
      s += w.components[a][j] * gj * gj;
    }
  }
  return s * rho.grid.cell_volume();
}

ScalarField fisher_variation(const ScalarField& rho) {
  require_positive(rho, "density (Fisher variation)");
  const auto g = gradient(log_field(rho));
  ScalarField out = squared_norm_at_cells(g);
  const ScalarField flux_div = divergence(multiply(face_average(rho), g));
  for (std::size_t j = 0; j < rho.size(); ++j) out[j] -= 2.0 * flux_div[j] / rho[j];
  return out;
}

double evaluate(const EnergyFunctional& F, const ScalarField& rho) {
  require_positive(rho, "density (energy)");
  double total = 0.0;
  for (const auto& term : F.terms()) {
    const double value = std::visit(
        Overloaded{
            [&](const LinearPotential& p) { return inner(p.potential, rho); },
            [&](const Interaction& w) { return 0.5 * inner(w.convolve(rho), rho); },
            [&](const FisherInformation&) { return fisher_information(rho); },
        },
        term.kind);
    total += term.coefficient * value;
  }
  return total;
}

ScalarField first_variation(const EnergyFunctional& F, const ScalarField& rho) {
  require_positive(rho, "density (first variation)");
  ScalarField out(rho.grid);
  for (const auto& term : F.terms()) {
    std::visit(Overloaded{
                   [&](const LinearPotential& p) { out.add_scaled(term.coefficient, p.potential); },
                   [&](const Interaction& w) { out.add_scaled(term.coefficient, w.convolve(rho)); },
                   [&](const FisherInformation&) { out.add_scaled(term.coefficient, fisher_variation(rho)); },
               },
               term.kind);
  }
  remove_mean(out);
  return out;
}

TangentVector wasserstein_gradient(const EnergyFunctional& F, const ScalarField& rho) {
  ScalarField g = WeightedLaplacian(rho).apply(first_variation(F, rho));
  g *= -1.0;
  return TangentVector(std::move(g));
}

double variation_check(const EnergyFunctional& F, const ScalarField& rho, const TangentVector& h_dir, double eps) {
  ScalarField plus = rho;
  plus.add_scaled(eps, h_dir.field());
  ScalarField minus = rho;
  minus.add_scaled(-eps, h_dir.field());
  require_positive(plus, "rho + eps h");
  require_positive(minus, "rho - eps h");
  const double fd = (evaluate(F, plus) - evaluate(F, minus)) / (2.0 * eps);
  return std::abs(fd - inner(first_variation(F, rho), h_dir.field()));
}

}  // namespace whf
