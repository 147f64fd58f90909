#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "whf/grid.hpp"

namespace whf {

/// FFTW-backed discrete Fourier transform on a Grid.
///
/// Plans are created once (FFTW_ESTIMATE, so results do not depend on
/// timing) and executed with the new-array interface, which makes `forward`
/// and `inverse` safe to call concurrently on one instance.
class Spectral {
 public:
  using Complex = std::complex<double>;

  explicit Spectral(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }

  /// In-place unnormalized forward transform.
  void forward(std::vector<Complex>& data) const;
  /// In-place inverse transform including the 1/size normalization.
  void inverse(std::vector<Complex>& data) const;

  /// Integer wave numbers of a spectral index, in (-n/2, n/2].
  std::array<int, 2> wave_numbers(std::size_t index) const noexcept;

  /// Continuum symbol |2 pi k|^2 of -Laplacian for a spectral index.
  double continuum_k2(std::size_t index) const noexcept;

  /// Symbol of the 2d+1 point -Laplacian: sum_a (2/h^2)(1 - cos(2 pi k_a h)).
  double discrete_k2(std::size_t index) const noexcept;

  /// Applies a real Fourier multiplier m(index) to a real field.
  ScalarField apply(const ScalarField& f, const std::function<double(std::size_t)>& multiplier) const;

 private:
  struct Plans;
  Grid grid_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace whf
