#pragma once

#include <complex>
#include <span>
#include <vector>

namespace speedmeter::detail {

// Real-to-complex / complex-to-real transforms of a fixed length, backed by FFTW.
// Transforms are unnormalized, matching FFTW conventions.
class RealFft {
public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // in.size() == size(); returns bins() coefficients.
  void forward(std::span<const double> in, std::vector<std::complex<double>>& out);
  // in.size() == bins(); returns size() samples scaled by size().
  void inverse(std::span<const std::complex<double>> in, std::vector<double>& out);

private:
  std::size_t n_;
  double* real_;
  void* spectrum_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace speedmeter::detail
