#include "speedmeter/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fft.hpp"
#include "speedmeter/error.hpp"

namespace speedmeter::synth {

std::vector<double> make_grid(const FrequencyGrid& grid) {
  if (grid.n_points < 2) throw invalid_argument("grid needs at least 2 points");
  if (!(grid.f_min > 0.0)) {
    throw invalid_argument("grid f_min must be positive, got " + std::to_string(grid.f_min));
  }
  if (!(grid.f_max > grid.f_min) || !std::isfinite(grid.f_max)) {
    throw invalid_argument("grid f_max must exceed f_min");
  }

  std::vector<double> f(grid.n_points);
  const double last = static_cast<double>(grid.n_points - 1);
  if (grid.spacing == Spacing::log) {
    const double a = std::log10(grid.f_min);
    const double b = std::log10(grid.f_max);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      f[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / last);
    }
  } else {
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      f[i] = grid.f_min + (grid.f_max - grid.f_min) * static_cast<double>(i) / last;
    }
  }
  f.front() = grid.f_min;
  f.back() = grid.f_max;
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (!(f[i] > f[i - 1])) throw invalid_argument("grid is too dense to be strictly increasing");
  }
  return f;
}

model::ComplexResponse synth_tf(const TfSynthParams& params, const FrequencyGrid& grid,
                                const MeasurementNoiseModel& noise) {
  if (!(noise.rel_amplitude_sigma >= 0.0) || !(noise.phase_sigma >= 0.0)) {
    throw invalid_argument("noise sigmas must be >= 0");
  }
  const std::vector<double> freqs = make_grid(grid);
  model::ComplexResponse out = model::evaluate_ratio(params.model, freqs);

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : out.values) {
    v *= params.gain;
    if (noise.rel_amplitude_sigma > 0.0 || noise.phase_sigma > 0.0) {
      const double a = noise.rel_amplitude_sigma * normal(rng);
      const double phi = noise.phase_sigma * normal(rng);
      v *= std::polar(1.0 + a, phi);
    }
  }
  return out;
}

namespace {

void validate_spec(const AsdSpec& spec) {
  if (spec.empty()) throw invalid_argument("ASD spec has no segments");
  for (const auto& s : spec) {
    if (!(s.f_lo >= 0.0) || !(s.f_hi > s.f_lo) || !(s.asd_at_lo >= 0.0) ||
        !std::isfinite(s.slope)) {
      throw invalid_argument("malformed ASD segment");
    }
    if (s.f_lo == 0.0 && s.slope != 0.0) {
      throw invalid_argument("ASD segment starting at 0 Hz must be flat");
    }
  }
}

double segment_value(const AsdSegment& s, double f) {
  if (s.slope == 0.0) return s.asd_at_lo;
  return s.asd_at_lo * std::pow(f / s.f_lo, s.slope);
}

// Integral of asd^2 over [a, b] within one segment.
double segment_power(const AsdSegment& s, double a, double b) {
  a = std::max(a, s.f_lo);
  b = std::min(b, s.f_hi);
  if (!(b > a)) return 0.0;
  const double amp2 = s.asd_at_lo * s.asd_at_lo;
  if (s.slope == 0.0) return amp2 * (b - a);
  const double p = 2.0 * s.slope + 1.0;
  const double norm = amp2 * std::pow(s.f_lo, -2.0 * s.slope);
  if (std::abs(p) < 1e-12) return norm * std::log(b / a);
  return norm * (std::pow(b, p) - std::pow(a, p)) / p;
}

}  // namespace

double asd_at(const AsdSpec& spec, double f) {
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& s = spec[i];
    const bool last = i + 1 == spec.size();
    if (f >= s.f_lo && (f < s.f_hi || (last && f == s.f_hi))) return segment_value(s, f);
  }
  return 0.0;
}

double band_power(const AsdSpec& spec, double f_a, double f_b) {
  double total = 0.0;
  for (const auto& s : spec) total += segment_power(s, f_a, f_b);
  return total;
}

AsdSpec scale_to_rms(AsdSpec spec, double target_rms, double f_top) {
  validate_spec(spec);
  const double power = band_power(spec, 0.0, f_top);
  if (!(power > 0.0)) throw invalid_argument("cannot rescale an ASD with zero power");
  const double k = target_rms / std::sqrt(power);
  for (auto& s : spec) s.asd_at_lo *= k;
  return spec;
}

std::vector<double> synth_noise_timeseries(const AsdSpec& spec, double duration, double rate,
                                           std::uint64_t seed) {
  validate_spec(spec);
  if (!(rate > 0.0)) throw invalid_argument("sample rate must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration * rate));
  if (n < 2) throw invalid_argument("duration * rate must give at least 2 samples");

  AsdSpec sorted = spec;
  std::sort(sorted.begin(), sorted.end(),
            [](const AsdSegment& a, const AsdSegment& b) { return a.f_lo < b.f_lo; });
  const double df = rate / static_cast<double>(n);
  if (sorted.front().f_lo > df) throw invalid_argument("ASD spec does not reach down to 0 Hz");
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].f_lo > sorted[i - 1].f_hi) throw invalid_argument("ASD spec has a gap");
  }
  if (sorted.back().f_hi < rate / 2.0) {
    throw invalid_argument("ASD spec does not reach the Nyquist frequency");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double fs_n = rate * static_cast<double>(n);

  std::vector<std::complex<double>> spectrum(n / 2 + 1);
  for (std::size_t k = 1; k < spectrum.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    const double psd = std::pow(asd_at(sorted, f), 2);
    const double re = normal(rng);
    const double im = normal(rng);
    if (n % 2 == 0 && k == n / 2) {
      spectrum[k] = std::sqrt(psd * fs_n / 2.0) * re;
    } else {
      spectrum[k] = std::sqrt(psd * fs_n / 2.0) * std::complex<double>(re, im) / std::sqrt(2.0);
    }
  }

  detail::RealFft fft(n);
  std::vector<double> series;
  fft.inverse(spectrum, series);
  for (auto& x : series) x /= static_cast<double>(n);
  return series;
}

}  // namespace speedmeter::synth
