#pragma once

#include <string>
#include <vector>

#include "speedmeter/config.hpp"

namespace speedmeter::app {

enum class ResponseMode { exact, firstorder, ratio };

// exact / firstorder: the physical speed response with every configured loss and detuning.
// ratio: the fitted speed/position observable as configured in cfg.model.
model::ComplexResponse compute_response(const RunConfig& cfg, ResponseMode mode);

struct Outcome {
  bool success = true;  // false: fit did not converge, or the lock sequence did not finish
  std::string report;   // key = value lines
  std::vector<std::string> written;
};

// `<out>` minus its extension, used to name companion files.
std::string output_stem(const std::string& out_path);

Outcome run_response(const RunConfig& cfg, ResponseMode mode, const std::string& out_path,
                     bool gnuplot);
Outcome run_fit(const RunConfig& cfg, const std::string& data_path, const std::string& out_path,
                bool gnuplot);
Outcome run_lock(const RunConfig& cfg, const std::string& out_path, bool gnuplot);
Outcome run_noise(const RunConfig& cfg, const std::string& data_path, const std::string& out_path,
                  bool gnuplot);
Outcome run_synth_tf(const RunConfig& cfg, const std::string& out_path);
Outcome run_synth_noise(const RunConfig& cfg, const std::string& out_path);

std::string format_fit_report(const fit::FitResult& r);
std::string format_lock_trace_csv(const lockacq::LockTrace& trace);
std::string format_transitions_csv(const lockacq::LockTrace& trace);
std::string format_spectrum_csv(const noise::SpectrumResult& s);
std::string format_noise_summary(const RunConfig& cfg, const noise::SpectrumResult& s);

// The ASD segments scaled to noise_synth.target_rms (when set) over (0, rate/2].
synth::AsdSpec noise_synth_spec(const RunConfig& cfg);

}  // namespace speedmeter::app
