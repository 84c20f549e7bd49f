#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "speedmeter/fit.hpp"
#include "speedmeter/lockacq.hpp"
#include "speedmeter/model.hpp"
#include "speedmeter/noise.hpp"
#include "speedmeter/synth.hpp"

namespace speedmeter {

// Green-beam parameters of the circulation cavity.
struct GreenParams {
  double lambda_gr = 532e-9;
  double finesse_gr = 50.0;
  double t_pcm_gr = 0.01;
  double t_itm_gr = 500e-6;
};

struct NoiseSynthConfig {
  synth::AsdSpec segments{{0.0, 1.0, 1.0, 0.0}, {1.0, 128.0, 1.0, -1.0}};
  std::optional<double> target_rms = 1e-10;  // m; rescales the segments when set
  double duration = 1024.0;                  // s
  double rate = 256.0;                       // Hz
  std::uint64_t seed = 7;
};

// One document holding every module's parameters. Defaults reproduce the shipped fixtures.
struct RunConfig {
  model::RatioModel model;
  std::optional<double> dl_pcc_rms;  // m; converted to pcc.dphi_pcc by finalize()
  model::PhaseConvention phase_convention = model::PhaseConvention::round_trip;

  synth::FrequencyGrid grid;
  synth::MeasurementNoiseModel tf_noise;
  model::cplx true_gain{1.0, 0.0};

  fit::FitConfig fit;

  GreenParams green;
  lockacq::PlantConfig plant;  // consts, l_pcc, main_finesse and green fields come from above
  lockacq::ServoConfig servo;
  lockacq::RunSettings lock_run;

  noise::SpectrumConfig spectrum;
  double sample_rate = 256.0;  // Hz, for single-column series
  NoiseSynthConfig noise_synth;
};

// Parses `text` (sections of key = value lines) on top of `cfg`. Unknown sections or keys,
// duplicate keys and malformed values throw with the line number and the offending name.
void merge_config_text(RunConfig& cfg, std::string_view text, const std::string& origin);
void merge_config_file(RunConfig& cfg, const std::string& path);

// Sets one "section.key" entry from its textual value.
void set_config_value(RunConfig& cfg, std::string_view dotted_key, std::string_view value);

// Applies the length-to-phase conversion, copies shared fields into the plant and
// validates every sub-config. Warnings go to the returned string (empty when none).
std::string finalize(RunConfig& cfg);

void set_all_seeds(RunConfig& cfg, std::uint64_t seed);

}  // namespace speedmeter
