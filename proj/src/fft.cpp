#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace speedmeter::detail {

namespace {
// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("FFT length must be >= 2");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n_);
  auto* spec = fftw_alloc_complex(bins());
  spectrum_ = spec;
  // FFTW_ESTIMATE keeps the chosen algorithm, and so the output bits, reproducible.
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, spec, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(spectrum_);
}

void RealFft::forward(std::span<const double> in, std::vector<std::complex<double>>& out) {
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  const auto* spec = reinterpret_cast<const std::complex<double>*>(spectrum_);
  out.assign(spec, spec + bins());
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::vector<double>& out) {
  auto* spec = reinterpret_cast<std::complex<double>*>(spectrum_);
  std::copy(in.begin(), in.end(), spec);
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  out.assign(real_, real_ + n_);
}

}  // namespace speedmeter::detail
