#include "speedmeter/speedmeter.h"

#include <exception>
#include <new>
#include <string>

#include "speedmeter/config.hpp"
#include "speedmeter/error.hpp"
#include "speedmeter/io.hpp"
#include "speedmeter/workflows.hpp"

using namespace speedmeter;

struct sm_config {
  RunConfig cfg;
  std::string warnings;
};

struct sm_tf {
  model::ComplexResponse tf;
};

struct sm_lock_trace {
  lockacq::LockTrace trace;
};

struct sm_spectrum {
  noise::SpectrumResult s;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_report;

sm_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return SM_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse: return SM_ERR_PARSE;
    case ErrorCode::io: return SM_ERR_IO;
    case ErrorCode::numeric: return SM_ERR_NUMERIC;
  }
  return SM_ERR_INTERNAL;
}

template <typename F>
sm_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return SM_ERR_INTERNAL;
}

sm_status null_arg(const char* name) {
  g_last_error = std::string(name) + " must not be NULL";
  return SM_ERR_INVALID_ARGUMENT;
}

// Every computation runs on a finalized copy, so handles stay as the caller built them.
RunConfig finalized(const sm_config* cfg) {
  RunConfig copy = cfg->cfg;
  finalize(copy);
  return copy;
}

sm_lock_state to_c(lockacq::LockState s) { return static_cast<sm_lock_state>(s); }

sm_status finish(const app::Outcome& outcome, sm_status failure) {
  g_last_report = outcome.report;
  return outcome.success ? SM_OK : failure;
}

}  // namespace

#define SM_REQUIRE(p)                   \
  do {                                  \
    if ((p) == nullptr) return null_arg(#p); \
  } while (0)

extern "C" {

const char* sm_last_error(void) { return g_last_error.c_str(); }
const char* sm_last_report(void) { return g_last_report.c_str(); }

const char* sm_status_name(sm_status status) {
  switch (status) {
    case SM_OK: return "ok";
    case SM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SM_ERR_PARSE: return "parse error";
    case SM_ERR_IO: return "i/o error";
    case SM_ERR_NUMERIC: return "numeric failure";
    case SM_NOT_CONVERGED: return "not converged";
    case SM_NO_LOCK: return "no lock";
    case SM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sm_lock_state_name(sm_lock_state state) {
  if (state < SM_LOCK_IDLE || state > SM_LOCK_SPEED_METER) return "unknown";
  return lockacq::to_string(static_cast<lockacq::LockState>(state));
}

sm_status sm_config_new(sm_config** out) {
  SM_REQUIRE(out);
  return guarded([&] {
    *out = new sm_config;
    return SM_OK;
  });
}

void sm_config_free(sm_config* cfg) { delete cfg; }

sm_status sm_config_load_file(sm_config* cfg, const char* path) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(path);
  return guarded([&] {
    RunConfig next = cfg->cfg;
    merge_config_file(next, path);
    cfg->cfg = next;
    return SM_OK;
  });
}

sm_status sm_config_load_text(sm_config* cfg, const char* text) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(text);
  return guarded([&] {
    RunConfig next = cfg->cfg;
    merge_config_text(next, text, "<text>");
    cfg->cfg = next;
    return SM_OK;
  });
}

sm_status sm_config_set(sm_config* cfg, const char* key, const char* value) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(key);
  SM_REQUIRE(value);
  return guarded([&] {
    set_config_value(cfg->cfg, key, value);
    return SM_OK;
  });
}

sm_status sm_config_set_seed(sm_config* cfg, uint64_t seed) {
  SM_REQUIRE(cfg);
  set_all_seeds(cfg->cfg, seed);
  return SM_OK;
}

sm_status sm_config_check(sm_config* cfg, const char** warnings) {
  SM_REQUIRE(cfg);
  return guarded([&] {
    RunConfig copy = cfg->cfg;
    cfg->warnings = finalize(copy);
    if (warnings) *warnings = cfg->warnings.c_str();
    return SM_OK;
  });
}

sm_status sm_derive_rates(const sm_config* cfg, sm_rates* out) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(out);
  return guarded([&] {
    const RunConfig c = finalized(cfg);
    const auto r = model::derive_rates(c.model.consts, c.model.cav, c.model.pcc);
    *out = {r.gamma1, r.gamma2, r.gamma_cut, r.delta_ret, r.delta_pcc,
            r.finesse, r.tau, r.f_c, r.warnings};
    return SM_OK;
  });
}

sm_status sm_project_detuning(const sm_config* cfg, double rms_length,
                              sm_phase_convention convention, double* out_hz) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(out_hz);
  return guarded([&] {
    if (convention != SM_SINGLE_PASS && convention != SM_ROUND_TRIP) {
      throw invalid_argument("unknown phase convention");
    }
    const RunConfig c = finalized(cfg);
    const auto r = model::derive_rates(c.model.consts, c.model.cav, c.model.pcc);
    *out_hz = noise::project_detuning(rms_length, c.model.consts, r,
                                      convention == SM_ROUND_TRIP ? model::PhaseConvention::round_trip
                                                                  : model::PhaseConvention::single_pass);
    return SM_OK;
  });
}

sm_status sm_tf_response(const sm_config* cfg, sm_response_mode mode, sm_tf** out) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(out);
  return guarded([&] {
    if (mode < SM_RESPONSE_EXACT || mode > SM_RESPONSE_RATIO) {
      throw invalid_argument("unknown response mode");
    }
    auto tf = app::compute_response(finalized(cfg), static_cast<app::ResponseMode>(mode));
    *out = new sm_tf{std::move(tf)};
    return SM_OK;
  });
}

sm_status sm_tf_synth(const sm_config* cfg, sm_tf** out) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(out);
  return guarded([&] {
    const RunConfig c = finalized(cfg);
    *out = new sm_tf{synth::synth_tf({c.model, c.true_gain}, c.grid, c.tf_noise)};
    return SM_OK;
  });
}

sm_status sm_tf_from_arrays(const double* f_hz, const double* re, const double* im, size_t n,
                            sm_tf** out) {
  SM_REQUIRE(out);
  if (n > 0) {
    SM_REQUIRE(f_hz);
    SM_REQUIRE(re);
    SM_REQUIRE(im);
  }
  return guarded([&] {
    model::ComplexResponse tf;
    for (size_t i = 0; i < n; ++i) {
      tf.freqs.push_back(f_hz[i]);
      tf.values.emplace_back(re[i], im[i]);
    }
    tf.validate();
    *out = new sm_tf{std::move(tf)};
    return SM_OK;
  });
}

sm_status sm_tf_read_csv(const char* path, sm_tf** out) {
  SM_REQUIRE(path);
  SM_REQUIRE(out);
  return guarded([&] {
    *out = new sm_tf{io::parse_tf_csv(io::read_file(path), path)};
    return SM_OK;
  });
}

size_t sm_tf_size(const sm_tf* tf) { return tf ? tf->tf.size() : 0; }

sm_status sm_tf_get(const sm_tf* tf, size_t i, double* f_hz, double* re, double* im) {
  SM_REQUIRE(tf);
  if (i >= tf->tf.size()) {
    g_last_error = "index out of range";
    return SM_ERR_INVALID_ARGUMENT;
  }
  if (f_hz) *f_hz = tf->tf.freqs[i];
  if (re) *re = tf->tf.values[i].real();
  if (im) *im = tf->tf.values[i].imag();
  return SM_OK;
}

void sm_tf_free(sm_tf* tf) { delete tf; }

sm_status sm_fit(const sm_config* cfg, const sm_tf* data, sm_fit_result* out) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(data);
  SM_REQUIRE(out);
  return guarded([&] {
    const RunConfig c = finalized(cfg);
    const auto r = fit::fit_loss(data->tf, c.fit, c.model);
    *out = {r.loss_cav_hat, r.gain_hat.real(), r.gain_hat.imag(), r.final_cost,
            r.n_iters,      r.converged ? 1 : 0, r.at_bound ? 1 : 0};
    if (!r.converged) {
      g_last_error = "fit did not converge within max_iters";
      return SM_NOT_CONVERGED;
    }
    return SM_OK;
  });
}

sm_status sm_lock_run(const sm_config* cfg, sm_lock_trace** out) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(out);
  return guarded([&] {
    const RunConfig c = finalized(cfg);
    auto* trace = new sm_lock_trace{lockacq::run_acquisition(c.plant, c.servo, c.lock_run)};
    *out = trace;
    if (!trace->trace.success) {
      g_last_error = trace->trace.diagnostic;
      return SM_NO_LOCK;
    }
    return SM_OK;
  });
}

size_t sm_lock_trace_size(const sm_lock_trace* trace) {
  return trace ? trace->trace.samples.size() : 0;
}

sm_status sm_lock_trace_sample(const sm_lock_trace* trace, size_t i, sm_lock_sample* out) {
  SM_REQUIRE(trace);
  SM_REQUIRE(out);
  if (i >= trace->trace.samples.size()) {
    g_last_error = "index out of range";
    return SM_ERR_INVALID_ARGUMENT;
  }
  const auto& s = trace->trace.samples[i];
  *out = {s.t, to_c(trace->trace.states[i]), s.ir_trans, s.gr_trans, s.dcpd1, s.pcc_length,
          s.gr_freq_offset};
  return SM_OK;
}

size_t sm_lock_trace_transition_count(const sm_lock_trace* trace) {
  return trace ? trace->trace.transitions.size() : 0;
}

sm_status sm_lock_trace_transition(const sm_lock_trace* trace, size_t i, sm_lock_state* from,
                                   sm_lock_state* to, double* t) {
  SM_REQUIRE(trace);
  if (i >= trace->trace.transitions.size()) {
    g_last_error = "index out of range";
    return SM_ERR_INVALID_ARGUMENT;
  }
  const auto& tr = trace->trace.transitions[i];
  if (from) *from = to_c(tr.from);
  if (to) *to = to_c(tr.to);
  if (t) *t = tr.t;
  return SM_OK;
}

sm_lock_state sm_lock_trace_final_state(const sm_lock_trace* trace) {
  return trace ? to_c(trace->trace.final_state) : SM_LOCK_IDLE;
}

void sm_lock_trace_free(sm_lock_trace* trace) { delete trace; }

sm_status sm_spectrum_estimate(const sm_config* cfg, const double* series, size_t n, double rate,
                               sm_spectrum** out) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(out);
  if (n > 0) SM_REQUIRE(series);
  return guarded([&] {
    const RunConfig c = finalized(cfg);
    *out = new sm_spectrum{noise::estimate_asd(std::span<const double>(series, n), rate, c.spectrum)};
    return SM_OK;
  });
}

size_t sm_spectrum_size(const sm_spectrum* s) { return s ? s->s.freqs.size() : 0; }

sm_status sm_spectrum_get(const sm_spectrum* s, size_t i, double* f, double* asd, double* cum_rms) {
  SM_REQUIRE(s);
  if (i >= s->s.freqs.size()) {
    g_last_error = "index out of range";
    return SM_ERR_INVALID_ARGUMENT;
  }
  if (f) *f = s->s.freqs[i];
  if (asd) *asd = s->s.asd[i];
  if (cum_rms) *cum_rms = s->s.cum_rms[i];
  return SM_OK;
}

double sm_spectrum_total_rms(const sm_spectrum* s) { return s ? s->s.total_rms : 0.0; }

double sm_spectrum_rms_above(const sm_spectrum* s, double f) {
  return s ? noise::rms_above(s->s, f) : 0.0;
}

void sm_spectrum_free(sm_spectrum* s) { delete s; }

sm_status sm_cmd_response(const sm_config* cfg, sm_response_mode mode, const char* out_path,
                          int gnuplot) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(out_path);
  return guarded([&] {
    if (mode < SM_RESPONSE_EXACT || mode > SM_RESPONSE_RATIO) {
      throw invalid_argument("unknown response mode");
    }
    return finish(app::run_response(finalized(cfg), static_cast<app::ResponseMode>(mode), out_path,
                                    gnuplot != 0),
                  SM_ERR_INTERNAL);
  });
}

sm_status sm_cmd_fit(const sm_config* cfg, const char* data_path, const char* out_path, int gnuplot) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(data_path);
  SM_REQUIRE(out_path);
  return guarded([&] {
    const auto outcome = app::run_fit(finalized(cfg), data_path, out_path, gnuplot != 0);
    if (!outcome.success) g_last_error = "fit did not converge within max_iters";
    return finish(outcome, SM_NOT_CONVERGED);
  });
}

sm_status sm_cmd_lock(const sm_config* cfg, const char* out_path, int gnuplot) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(out_path);
  return guarded([&] {
    const auto outcome = app::run_lock(finalized(cfg), out_path, gnuplot != 0);
    if (!outcome.success) g_last_error = "acquisition did not reach SpeedMeter";
    return finish(outcome, SM_NO_LOCK);
  });
}

sm_status sm_cmd_noise(const sm_config* cfg, const char* data_path, const char* out_path,
                       int gnuplot) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(data_path);
  SM_REQUIRE(out_path);
  return guarded([&] {
    return finish(app::run_noise(finalized(cfg), data_path, out_path, gnuplot != 0), SM_ERR_INTERNAL);
  });
}

sm_status sm_cmd_synth_tf(const sm_config* cfg, const char* out_path) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(out_path);
  return guarded([&] { return finish(app::run_synth_tf(finalized(cfg), out_path), SM_ERR_INTERNAL); });
}

sm_status sm_cmd_synth_noise(const sm_config* cfg, const char* out_path) {
  SM_REQUIRE(cfg);
  SM_REQUIRE(out_path);
  return guarded(
      [&] { return finish(app::run_synth_noise(finalized(cfg), out_path), SM_ERR_INTERNAL); });
}

}  // extern "C"
