#pragma once

#include <cstdint>
#include <vector>

#include "speedmeter/model.hpp"

namespace speedmeter::synth {

enum class Spacing { log, linear };

struct FrequencyGrid {
  double f_min = 4e3;
  double f_max = 2e6;
  std::size_t n_points = 200;
  Spacing spacing = Spacing::log;
};

std::vector<double> make_grid(const FrequencyGrid& grid);

struct MeasurementNoiseModel {
  double rel_amplitude_sigma = 0.0;
  double phase_sigma = 0.0;  // rad
  std::uint64_t seed = 42;
};

struct TfSynthParams {
  model::RatioModel model;
  model::cplx gain{1.0, 0.0};
};

model::ComplexResponse synth_tf(const TfSynthParams& params, const FrequencyGrid& grid,
                                const MeasurementNoiseModel& noise);

// One piece of a piecewise power-law ASD: asd(f) = asd_at_lo * (f / f_lo)^slope on [f_lo, f_hi).
struct AsdSegment {
  double f_lo = 0.0;
  double f_hi = 0.0;
  double asd_at_lo = 0.0;  // m/sqrt(Hz)
  double slope = 0.0;
};

using AsdSpec = std::vector<AsdSegment>;

// Evaluates the spec; 0 outside every segment.
double asd_at(const AsdSpec& spec, double f);

// Closed-form integral of asd^2 over [f_a, f_b].
double band_power(const AsdSpec& spec, double f_a, double f_b);

// Rescales every segment so that the RMS over (0, f_top] equals target_rms.
AsdSpec scale_to_rms(AsdSpec spec, double target_rms, double f_top);

// Gaussian series with one-sided ASD following spec, from frequency-domain shaping.
std::vector<double> synth_noise_timeseries(const AsdSpec& spec, double duration, double rate,
                                           std::uint64_t seed);

}  // namespace speedmeter::synth
