#include "whf/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace whf {

namespace {
// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Spectral::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Plans(const Grid& g) {
    int dims[2] = {g.n(), g.n()};
    std::vector<Complex> scratch(g.size());
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft(g.dim(), dims, p, p, FFTW_FORWARD, flags);
    backward = fftw_plan_dft(g.dim(), dims, p, p, FFTW_BACKWARD, flags);
  }

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

Spectral::Spectral(const Grid& grid) : grid_(grid), plans_(std::make_shared<const Plans>(grid)) {}

void Spectral::forward(std::vector<Complex>& data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->forward, p, p);
}

void Spectral::inverse(std::vector<Complex>& data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->backward, p, p);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& z : data) z *= scale;
}

std::array<int, 2> Spectral::wave_numbers(std::size_t index) const noexcept {
  auto c = grid_.coords(index);
  const int n = grid_.n();
  for (int a = 0; a < grid_.dim(); ++a) {
    if (c[a] > n / 2) c[a] -= n;
  }
  return c;
}

double Spectral::continuum_k2(std::size_t index) const noexcept {
  const auto k = wave_numbers(index);
  const double two_pi = 2.0 * std::numbers::pi;
  double s = 0.0;
  for (int a = 0; a < grid_.dim(); ++a) s += (two_pi * k[a]) * (two_pi * k[a]);
  return s;
}

double Spectral::discrete_k2(std::size_t index) const noexcept {
  const auto k = wave_numbers(index);
  const double h = grid_.spacing();
  double s = 0.0;
  for (int a = 0; a < grid_.dim(); ++a) {
    s += 2.0 / (h * h) * (1.0 - std::cos(2.0 * std::numbers::pi * k[a] * h));
  }
  return s;
}

ScalarField Spectral::apply(const ScalarField& f, const std::function<double(std::size_t)>& multiplier) const {
  std::vector<Complex> buf(f.values.begin(), f.values.end());
  forward(buf);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= multiplier(i);
  inverse(buf);
  ScalarField out(f.grid);
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace whf
