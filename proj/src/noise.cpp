#include "speedmeter/noise.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "fft.hpp"
#include "speedmeter/error.hpp"

namespace speedmeter::noise {

void validate(const SpectrumConfig& cfg) {
  if (cfg.segment_length < 8 || cfg.segment_length % 2 != 0) {
    throw invalid_argument("segment_length must be even and >= 8, got " +
                           std::to_string(cfg.segment_length));
  }
  if (!(cfg.overlap >= 0.0 && cfg.overlap < 1.0)) {
    throw invalid_argument("overlap must lie in [0, 1)");
  }
  if (!(cfg.readout_freq >= 0.0)) throw invalid_argument("readout_freq must be >= 0");
}

SpectrumResult estimate_asd(std::span<const double> series, double rate,
                            const SpectrumConfig& cfg) {
  validate(cfg);
  if (!(rate > 0.0)) throw invalid_argument("sample rate must be positive");
  const std::size_t n = cfg.segment_length;
  if (series.size() < n) {
    throw invalid_argument("series has " + std::to_string(series.size()) +
                           " samples; need at least " + std::to_string(n));
  }

  std::vector<double> window(n, 1.0);
  if (cfg.window == Window::hann) {
    for (std::size_t i = 0; i < n; ++i) {
      window[i] = 0.5 - 0.5 * std::cos(model::kTwoPi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  const double window_power = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);

  const auto step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - cfg.overlap))));

  detail::RealFft fft(n);
  std::vector<double> psd(fft.bins(), 0.0);
  std::vector<double> segment(n);
  std::vector<std::complex<double>> spectrum;
  std::size_t count = 0;
  for (std::size_t start = 0; start + n <= series.size(); start += step) {
    const auto seg = series.subspan(start, n);
    const double mean =
        cfg.detrend ? std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(n) : 0.0;
    for (std::size_t i = 0; i < n; ++i) segment[i] = (seg[i] - mean) * window[i];
    fft.forward(segment, spectrum);
    for (std::size_t k = 0; k < psd.size(); ++k) psd[k] += std::norm(spectrum[k]);
    ++count;
  }

  SpectrumResult out;
  out.freqs.resize(psd.size());
  out.asd.resize(psd.size());
  const double scale = 1.0 / (rate * window_power * static_cast<double>(count));
  for (std::size_t k = 0; k < psd.size(); ++k) {
    const bool edge = k == 0 || k == n / 2;
    out.freqs[k] = static_cast<double>(k) * rate / static_cast<double>(n);
    out.asd[k] = std::sqrt((edge ? 1.0 : 2.0) * psd[k] * scale);
  }
  out.cum_rms = accumulate_rms(out.asd, out.freqs);
  out.total_rms = out.cum_rms.front();
  return out;
}

std::vector<double> accumulate_rms(std::span<const double> asd, std::span<const double> freqs) {
  if (asd.size() != freqs.size()) throw invalid_argument("ASD and frequency grids differ in size");
  if (freqs.size() < 2) throw invalid_argument("need at least 2 frequency bins");
  const std::size_t n = freqs.size();
  std::vector<double> cum(n);
  double acc = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double width = k + 1 < n ? freqs[k + 1] - freqs[k] : freqs[k] - freqs[k - 1];
    acc += asd[k] * asd[k] * width;
    cum[k] = std::sqrt(acc);
  }
  return cum;
}

double rms_above(const SpectrumResult& spectrum, double f) {
  for (std::size_t k = 0; k < spectrum.freqs.size(); ++k) {
    if (spectrum.freqs[k] >= f) return spectrum.cum_rms[k];
  }
  return 0.0;
}

double project_detuning(double rms_length, const model::PhysicalConstants& consts,
                        const model::DerivedRates& rates, model::PhaseConvention convention) {
  if (!(rms_length >= 0.0)) throw invalid_argument("rms_length must be >= 0");
  const double dphi = model::length_to_phase(rms_length, consts.lambda0, convention);
  return rates.gamma1 * dphi / 2.0 / model::kTwoPi;
}

}  // namespace speedmeter::noise
