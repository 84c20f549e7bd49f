#include "speedmeter/workflows.hpp"

#include <filesystem>

#include "speedmeter/error.hpp"
#include "speedmeter/io.hpp"

namespace speedmeter::app {

using io::format_number;

namespace {

std::string kv(const std::string& key, const std::string& value) { return key + " = " + value + "\n"; }
std::string kv(const std::string& key, double value) { return kv(key, format_number(value)); }
std::string kv_bool(const std::string& key, bool value) { return kv(key, value ? "true" : "false"); }

std::string file_name(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

void write(Outcome& outcome, const std::string& path, const std::string& contents) {
  io::write_file_atomic(path, contents);
  outcome.written.push_back(path);
}

std::string plot_header(const std::string& title) {
  return "set datafile separator ','\nset key autotitle columnhead\nset grid\nset title '" + title +
         "'\n";
}

}  // namespace

std::string output_stem(const std::string& out_path) {
  std::filesystem::path p(out_path);
  return (p.parent_path() / p.stem()).string();
}

model::ComplexResponse compute_response(const RunConfig& cfg, ResponseMode mode) {
  const std::vector<double> freqs = synth::make_grid(cfg.grid);
  if (mode == ResponseMode::ratio) return model::evaluate_ratio(cfg.model, freqs);

  const auto& m = cfg.model;
  const model::DerivedRates rates = model::derive_rates(m.consts, m.cav, m.pcc);
  const double phi = m.pcc.dphi_ret + m.pcc.dphi_pcc;
  model::ComplexResponse out;
  out.freqs = freqs;
  for (double f : freqs) {
    const double omega = model::kTwoPi * f;
    out.values.push_back(mode == ResponseMode::exact
                             ? model::speed_response_exact(rates, m.pcc, phi, omega)
                             : model::speed_response_firstorder(rates, omega));
  }
  return out;
}

Outcome run_response(const RunConfig& cfg, ResponseMode mode, const std::string& out_path,
                     bool gnuplot) {
  Outcome outcome;
  const auto tf = compute_response(cfg, mode);
  tf.validate();
  write(outcome, out_path, io::format_tf_csv(tf));
  if (gnuplot) {
    const std::string data = file_name(out_path);
    write(outcome, output_stem(out_path) + ".gp",
          plot_header("response") +
              "set multiplot layout 2,1\nset logscale x\nset logscale y\nset ylabel '|H|'\n"
              "plot '" + data + "' using 1:4 with lines\n"
              "unset logscale y\nset ylabel 'Re, Im'\nset xlabel 'f [Hz]'\n"
              "plot '" + data + "' using 1:2 with lines, '' using 1:3 with lines\n"
              "unset multiplot\n");
  }
  outcome.report = kv("points", std::to_string(tf.size()));
  return outcome;
}

std::string format_fit_report(const fit::FitResult& r) {
  return kv("loss_cav_hat_ppm", r.loss_cav_hat * 1e6) + kv("gain_re", r.gain_hat.real()) +
         kv("gain_im", r.gain_hat.imag()) + kv("final_cost", r.final_cost) +
         kv_bool("converged", r.converged) + kv_bool("at_bound", r.at_bound) +
         kv("n_iters", std::to_string(r.n_iters));
}

Outcome run_fit(const RunConfig& cfg, const std::string& data_path, const std::string& out_path,
                bool gnuplot) {
  Outcome outcome;
  const auto data = io::parse_tf_csv(io::read_file(data_path), data_path);
  const fit::FitResult result = fit::fit_loss(data, cfg.fit, cfg.model);

  model::ComplexResponse residuals{result.freqs, result.residuals};
  const std::string residual_path = output_stem(out_path) + "_residuals.csv";
  write(outcome, residual_path, io::format_tf_csv(residuals));
  outcome.report = format_fit_report(result);
  write(outcome, out_path, outcome.report);
  if (gnuplot) {
    write(outcome, output_stem(out_path) + "_residuals.gp",
          plot_header("fit residuals") + "set logscale x\nset xlabel 'f [Hz]'\nplot '" +
              file_name(residual_path) + "' using 1:2 with points, '' using 1:3 with points\n");
  }
  outcome.success = result.converged;
  return outcome;
}

std::string format_lock_trace_csv(const lockacq::LockTrace& trace) {
  std::string out = "t,lock_state,ir_trans,gr_trans,dcpd1,pcc_length,gr_freq_offset\n";
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    out += format_number(s.t) + ',' + lockacq::to_string(trace.states[i]) + ',' +
           format_number(s.ir_trans) + ',' + format_number(s.gr_trans) + ',' +
           format_number(s.dcpd1) + ',' + format_number(s.pcc_length) + ',' +
           format_number(s.gr_freq_offset) + '\n';
  }
  return out;
}

std::string format_transitions_csv(const lockacq::LockTrace& trace) {
  std::string out = "state,t\n";
  for (const auto& tr : trace.transitions) {
    out += std::string(lockacq::to_string(tr.to)) + ',' + format_number(tr.t) + '\n';
  }
  return out;
}

Outcome run_lock(const RunConfig& cfg, const std::string& out_path, bool gnuplot) {
  Outcome outcome;
  const lockacq::LockTrace trace = lockacq::run_acquisition(cfg.plant, cfg.servo, cfg.lock_run);
  write(outcome, out_path, format_lock_trace_csv(trace));
  write(outcome, output_stem(out_path) + "_transitions.csv", format_transitions_csv(trace));
  if (gnuplot) {
    write(outcome, output_stem(out_path) + ".gp",
          plot_header("lock acquisition") + "set xlabel 't [s]'\nplot '" + file_name(out_path) +
              "' using 1:3 with lines, '' using 1:4 with lines, '' using 1:5 with lines\n");
  }
  outcome.success = trace.success;
  outcome.report = kv("final_state", lockacq::to_string(trace.final_state)) +
                   kv("transitions", std::to_string(trace.transitions.size()));
  if (!trace.diagnostic.empty()) outcome.report += kv("diagnostic", trace.diagnostic);
  return outcome;
}

std::string format_spectrum_csv(const noise::SpectrumResult& s) {
  std::string out = "f,asd,cum_rms\n";
  for (std::size_t i = 0; i < s.freqs.size(); ++i) {
    out += format_number(s.freqs[i]) + ',' + format_number(s.asd[i]) + ',' +
           format_number(s.cum_rms[i]) + '\n';
  }
  return out;
}

std::string format_noise_summary(const RunConfig& cfg, const noise::SpectrumResult& s) {
  const auto& m = cfg.model;
  const model::DerivedRates rates = model::derive_rates(m.consts, m.cav, m.pcc);
  const double readout = noise::rms_above(s, cfg.spectrum.readout_freq);
  using model::PhaseConvention;
  const auto project = [&](double rms, PhaseConvention c) {
    return noise::project_detuning(rms, m.consts, rates, c);
  };
  return kv("total_rms", s.total_rms) + kv("readout_freq", cfg.spectrum.readout_freq) +
         kv("readout_rms", readout) +
         kv("detuning_total_single_pass_hz", project(s.total_rms, PhaseConvention::single_pass)) +
         kv("detuning_total_round_trip_hz", project(s.total_rms, PhaseConvention::round_trip)) +
         kv("detuning_readout_single_pass_hz", project(readout, PhaseConvention::single_pass)) +
         kv("detuning_readout_round_trip_hz", project(readout, PhaseConvention::round_trip));
}

Outcome run_noise(const RunConfig& cfg, const std::string& data_path, const std::string& out_path,
                  bool gnuplot) {
  Outcome outcome;
  const io::Series series = io::parse_series_csv(io::read_file(data_path), data_path, cfg.sample_rate);
  const noise::SpectrumResult spectrum = noise::estimate_asd(series.values, series.rate, cfg.spectrum);
  write(outcome, out_path, format_spectrum_csv(spectrum));
  outcome.report = format_noise_summary(cfg, spectrum);
  write(outcome, output_stem(out_path) + "_summary.txt", outcome.report);
  if (gnuplot) {
    write(outcome, output_stem(out_path) + ".gp",
          plot_header("length noise") +
              "set logscale xy\nset xlabel 'f [Hz]'\nplot '" + file_name(out_path) +
              "' using 1:2 with lines, '' using 1:3 with lines\n");
  }
  return outcome;
}

Outcome run_synth_tf(const RunConfig& cfg, const std::string& out_path) {
  Outcome outcome;
  const auto tf = synth::synth_tf({cfg.model, cfg.true_gain}, cfg.grid, cfg.tf_noise);
  write(outcome, out_path, io::format_tf_csv(tf));
  outcome.report = kv("points", std::to_string(tf.size()));
  return outcome;
}

synth::AsdSpec noise_synth_spec(const RunConfig& cfg) {
  const auto& ns = cfg.noise_synth;
  if (!ns.target_rms) return ns.segments;
  return synth::scale_to_rms(ns.segments, *ns.target_rms, ns.rate / 2.0);
}

Outcome run_synth_noise(const RunConfig& cfg, const std::string& out_path) {
  Outcome outcome;
  const auto& ns = cfg.noise_synth;
  const auto series = synth::synth_noise_timeseries(noise_synth_spec(cfg), ns.duration, ns.rate, ns.seed);
  write(outcome, out_path, io::format_series_csv(series, ns.rate));
  outcome.report = kv("samples", std::to_string(series.size())) + kv("rate", ns.rate);
  return outcome;
}

}  // namespace speedmeter::app
