#ifndef SPEEDMETER_H
#define SPEEDMETER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SM_API __declspec(dllexport)
#else
#define SM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sm_status {
  SM_OK = 0,
  SM_ERR_INVALID_ARGUMENT = 1,
  SM_ERR_PARSE = 2,
  SM_ERR_IO = 3,
  SM_ERR_NUMERIC = 4,
  SM_NOT_CONVERGED = 5,
  SM_NO_LOCK = 6,
  SM_ERR_INTERNAL = 7
} sm_status;

typedef enum sm_response_mode {
  SM_RESPONSE_EXACT = 0,
  SM_RESPONSE_FIRSTORDER = 1,
  SM_RESPONSE_RATIO = 2
} sm_response_mode;

typedef enum sm_phase_convention { SM_SINGLE_PASS = 0, SM_ROUND_TRIP = 1 } sm_phase_convention;

/* Same order as the acquisition sequence. */
typedef enum sm_lock_state {
  SM_LOCK_IDLE = 0,
  SM_LOCK_MAIN_LOCKED,
  SM_LOCK_PCC_SCANNING,
  SM_LOCK_PCC_GR_LOCKED,
  SM_LOCK_PLL_TUNING,
  SM_LOCK_SPEED_METER
} sm_lock_state;

typedef struct sm_config sm_config;
typedef struct sm_tf sm_tf;
typedef struct sm_lock_trace sm_lock_trace;
typedef struct sm_spectrum sm_spectrum;

typedef struct sm_rates {
  double gamma1; /* rad/s */
  double gamma2;
  double gamma_cut;
  double delta_ret;
  double delta_pcc;
  double finesse;
  double tau; /* s */
  double f_c; /* Hz */
  unsigned warnings;
} sm_rates;

typedef struct sm_fit_result {
  double loss_cav_hat;
  double gain_re;
  double gain_im;
  double final_cost;
  size_t n_iters;
  int converged;
  int at_bound;
} sm_fit_result;

typedef struct sm_lock_sample {
  double t;
  sm_lock_state state;
  double ir_trans;
  double gr_trans;
  double dcpd1;
  double pcc_length;
  double gr_freq_offset;
} sm_lock_sample;

/* Message for the last failing call on this thread ("" after success). */
SM_API const char* sm_last_error(void);
/* Key = value report of the last sm_cmd_* call on this thread. */
SM_API const char* sm_last_report(void);
SM_API const char* sm_status_name(sm_status status);
SM_API const char* sm_lock_state_name(sm_lock_state state);

/* Configuration starts from the built-in defaults (the shipped fixtures). */
SM_API sm_status sm_config_new(sm_config** out);
SM_API void sm_config_free(sm_config* cfg);
SM_API sm_status sm_config_load_file(sm_config* cfg, const char* path);
SM_API sm_status sm_config_load_text(sm_config* cfg, const char* text);
SM_API sm_status sm_config_set(sm_config* cfg, const char* key, const char* value);
SM_API sm_status sm_config_set_seed(sm_config* cfg, uint64_t seed);
/* Validates the whole document; *warnings (may be NULL) stays valid until the next call. */
SM_API sm_status sm_config_check(sm_config* cfg, const char** warnings);

SM_API sm_status sm_derive_rates(const sm_config* cfg, sm_rates* out);
SM_API sm_status sm_project_detuning(const sm_config* cfg, double rms_length,
                                     sm_phase_convention convention, double* out_hz);

SM_API sm_status sm_tf_response(const sm_config* cfg, sm_response_mode mode, sm_tf** out);
SM_API sm_status sm_tf_synth(const sm_config* cfg, sm_tf** out);
SM_API sm_status sm_tf_from_arrays(const double* f_hz, const double* re, const double* im, size_t n,
                                   sm_tf** out);
SM_API sm_status sm_tf_read_csv(const char* path, sm_tf** out);
SM_API size_t sm_tf_size(const sm_tf* tf);
SM_API sm_status sm_tf_get(const sm_tf* tf, size_t i, double* f_hz, double* re, double* im);
SM_API void sm_tf_free(sm_tf* tf);

/* Returns SM_NOT_CONVERGED with *out filled when the fit stops early. */
SM_API sm_status sm_fit(const sm_config* cfg, const sm_tf* data, sm_fit_result* out);

/* Returns SM_NO_LOCK with *out set when the run ends before SpeedMeter. */
SM_API sm_status sm_lock_run(const sm_config* cfg, sm_lock_trace** out);
SM_API size_t sm_lock_trace_size(const sm_lock_trace* trace);
SM_API sm_status sm_lock_trace_sample(const sm_lock_trace* trace, size_t i, sm_lock_sample* out);
SM_API size_t sm_lock_trace_transition_count(const sm_lock_trace* trace);
SM_API sm_status sm_lock_trace_transition(const sm_lock_trace* trace, size_t i, sm_lock_state* from,
                                          sm_lock_state* to, double* t);
SM_API sm_lock_state sm_lock_trace_final_state(const sm_lock_trace* trace);
SM_API void sm_lock_trace_free(sm_lock_trace* trace);

SM_API sm_status sm_spectrum_estimate(const sm_config* cfg, const double* series, size_t n,
                                      double rate, sm_spectrum** out);
SM_API size_t sm_spectrum_size(const sm_spectrum* s);
SM_API sm_status sm_spectrum_get(const sm_spectrum* s, size_t i, double* f, double* asd,
                                 double* cum_rms);
SM_API double sm_spectrum_total_rms(const sm_spectrum* s);
SM_API double sm_spectrum_rms_above(const sm_spectrum* s, double f);
SM_API void sm_spectrum_free(sm_spectrum* s);

/* File-level workflows behind the command-line tool. */
SM_API sm_status sm_cmd_response(const sm_config* cfg, sm_response_mode mode, const char* out_path,
                                 int gnuplot);
SM_API sm_status sm_cmd_fit(const sm_config* cfg, const char* data_path, const char* out_path,
                            int gnuplot);
SM_API sm_status sm_cmd_lock(const sm_config* cfg, const char* out_path, int gnuplot);
SM_API sm_status sm_cmd_noise(const sm_config* cfg, const char* data_path, const char* out_path,
                              int gnuplot);
SM_API sm_status sm_cmd_synth_tf(const sm_config* cfg, const char* out_path);
SM_API sm_status sm_cmd_synth_noise(const sm_config* cfg, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif
