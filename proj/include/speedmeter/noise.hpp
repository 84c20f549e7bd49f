#pragma once

#include <span>
#include <vector>

#include "speedmeter/model.hpp"

namespace speedmeter::noise {

enum class Window { hann, rectangular };

struct SpectrumConfig {
  std::size_t segment_length = 8192;
  double overlap = 0.5;
  Window window = Window::hann;
  bool detrend = true;         // remove each segment's mean
  double readout_freq = 0.02;  // Hz, where the band RMS is reported
};

void validate(const SpectrumConfig& cfg);

struct SpectrumResult {
  std::vector<double> freqs;    // Hz
  std::vector<double> asd;      // units/sqrt(Hz)
  std::vector<double> cum_rms;  // integrated from the top bin downward
  double total_rms = 0.0;
};

// Welch-averaged one-sided ASD, density-normalized so that sum(asd^2 * df) tracks the variance.
SpectrumResult estimate_asd(std::span<const double> series, double rate,
                            const SpectrumConfig& cfg);

// cum_rms[k] = sqrt(sum_{j >= k} asd[j]^2 * df[j]), df[j] the width of bin j.
std::vector<double> accumulate_rms(std::span<const double> asd, std::span<const double> freqs);

// Accumulated RMS at the first bin at or above f (the total when f is below the grid).
double rms_above(const SpectrumResult& spectrum, double f);

// Speed-meter detuning, in Hz, produced by an RMS circulation-cavity length fluctuation.
double project_detuning(double rms_length, const model::PhysicalConstants& consts,
                        const model::DerivedRates& rates, model::PhaseConvention convention);

}  // namespace speedmeter::noise
