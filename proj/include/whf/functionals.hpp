#pragma once

#include <variant>
#include <vector>

#include "whf/grid.hpp"
#include "whf/operators.hpp"

namespace whf {

/// F(rho) = integral of V rho.
struct LinearPotential {
  ScalarField potential;
};

enum class InteractionMethod { Direct, Convolution };

/// F(rho) = 1/2 sum_ij W(x_i - x_j) rho_i rho_j dV^2.
///
/// The kernel is stored as a field of offsets: kernel[m] = W(x_m - 0). It must
/// be even on the torus, kernel[m] == kernel[-m], which the constructor checks.
class Interaction {
 public:
  explicit Interaction(ScalarField kernel, InteractionMethod method = InteractionMethod::Direct);

  const ScalarField& kernel() const noexcept { return kernel_; }
  InteractionMethod method() const noexcept { return method_; }

  /// W_bar(x_i) = sum_j W(x_i - x_j) rho_j dV.
  ScalarField convolve(const ScalarField& rho) const;

 private:
  ScalarField kernel_;
  InteractionMethod method_;
};

/// I(rho) = sum over faces of rho_f |grad log rho|_f^2 dV.
struct FisherInformation {};

using EnergyKind = std::variant<LinearPotential, Interaction, FisherInformation>;

struct EnergyTerm {
  EnergyKind kind;
  double coefficient = 1.0;
};

/// Signed sum of potential energies on density space.
class EnergyFunctional {
 public:
  EnergyFunctional() = default;

  static EnergyFunctional linear(ScalarField potential, double coefficient = 1.0);
  static EnergyFunctional interaction(ScalarField kernel, double coefficient = 1.0,
                                      InteractionMethod method = InteractionMethod::Direct);
  static EnergyFunctional fisher(double coefficient);

  EnergyFunctional& add(EnergyKind kind, double coefficient = 1.0);
  EnergyFunctional operator-() const;

  const std::vector<EnergyTerm>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

 private:
  std::vector<EnergyTerm> terms_;
};

double evaluate(const EnergyFunctional& F, const ScalarField& rho);

/// Gradient of the discrete energy with respect to the cell values divided by
/// the cell volume, returned with zero mean.
ScalarField first_variation(const EnergyFunctional& F, const ScalarField& rho);

/// Per-term pieces, exposed for tests.
double fisher_information(const ScalarField& rho);
ScalarField fisher_variation(const ScalarField& rho);

/// -Delta_rho (dF/drho).
TangentVector wasserstein_gradient(const EnergyFunctional& F, const ScalarField& rho);

/// |[F(rho + eps h) - F(rho - eps h)] / 2 eps - inner(dF/drho, h)|.
double variation_check(const EnergyFunctional& F, const ScalarField& rho, const TangentVector& h_dir, double eps);

}  // namespace whf
