#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracle.hpp"
#include "speedmeter/speedmeter.h"

extern "C" int sm_c_check_rates(double* gamma1);

namespace fs = std::filesystem;
namespace fz = oracle::frozen;

namespace {

std::string fixture(const std::string& name) { return std::string(SM_FIXTURES) + "/" + name; }

struct Config {
  sm_config* p = nullptr;
  Config() { REQUIRE(sm_config_new(&p) == SM_OK); }
  ~Config() { sm_config_free(p); }
};

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("sm_capi_" + std::to_string(::getpid()));
  TempDir() { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& n) const { return (path / n).string(); }
};

}  // namespace

TEST_CASE("status and state names") {
  CHECK(std::strcmp(sm_status_name(SM_OK), "ok") == 0);
  CHECK(std::strlen(sm_status_name(SM_NO_LOCK)) > 0);
  CHECK(std::strcmp(sm_lock_state_name(SM_LOCK_SPEED_METER), "SpeedMeter") == 0);
  CHECK(std::strcmp(sm_lock_state_name(SM_LOCK_PCC_GR_LOCKED), "PccGrLocked") == 0);
}

TEST_CASE("header compiles as C") {
  double g1 = 0.0;
  CHECK(sm_c_check_rates(&g1) == 0);
  CHECK(g1 == doctest::Approx(static_cast<double>(fz::gamma1)).epsilon(1e-13));
}

TEST_CASE("derived rates through the C API") {
  Config c;
  sm_rates r{};
  REQUIRE(sm_derive_rates(c.p, &r) == SM_OK);
  CHECK(r.gamma1 == doctest::Approx(static_cast<double>(fz::gamma1)).epsilon(1e-13));
  CHECK(r.gamma2 == doctest::Approx(static_cast<double>(fz::gamma2)).epsilon(1e-13));
  CHECK(r.gamma_cut == doctest::Approx(static_cast<double>(fz::gamma_cut)).epsilon(1e-13));
  CHECK(r.delta_ret == doctest::Approx(static_cast<double>(fz::delta_ret)).epsilon(1e-13));
  CHECK(r.finesse == doctest::Approx(static_cast<double>(fz::finesse)).epsilon(1e-13));
  CHECK(r.f_c == doctest::Approx(static_cast<double>(fz::f_c)).epsilon(1e-13));

  double hz = 0.0;
  REQUIRE(sm_project_detuning(c.p, 1e-10, SM_ROUND_TRIP, &hz) == SM_OK);
  CHECK(hz == doctest::Approx(static_cast<double>(fz::project_1e10_round)).epsilon(1e-12));
  REQUIRE(sm_project_detuning(c.p, 7e-10, SM_SINGLE_PASS, &hz) == SM_OK);
  CHECK(hz == doctest::Approx(static_cast<double>(fz::project_7e10_single)).epsilon(1e-12));
}

TEST_CASE("argument and parse errors") {
  CHECK(sm_config_new(nullptr) == SM_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(sm_last_error()) > 0);
  Config c;
  CHECK(sm_config_set(c.p, "cavity.loss_cav", "9e-5") == SM_OK);
  CHECK(std::strcmp(sm_last_error(), "") == 0);
  CHECK(sm_config_set(c.p, "cavity.bogus", "1") == SM_ERR_PARSE);
  CHECK(std::string(sm_last_error()).find("cavity.bogus") != std::string::npos);
  CHECK(sm_config_load_text(c.p, "[fit]\nmax_iters = x\n") == SM_ERR_PARSE);
  CHECK(sm_config_load_file(c.p, "/nonexistent/file.cfg") == SM_ERR_IO);
  REQUIRE(sm_config_load_file(c.p, fixture("table1.cfg").c_str()) == SM_OK);

  CHECK(sm_config_set(c.p, "grid.n_points", "1") == SM_OK);
  const char* warnings = nullptr;
  CHECK(sm_config_check(c.p, &warnings) == SM_ERR_INVALID_ARGUMENT);
  CHECK(sm_config_set(c.p, "grid.n_points", "50") == SM_OK);
  CHECK(sm_config_check(c.p, &warnings) == SM_OK);
  REQUIRE(warnings != nullptr);

  sm_rates r{};
  CHECK(sm_derive_rates(nullptr, &r) == SM_ERR_INVALID_ARGUMENT);
  CHECK(sm_derive_rates(c.p, nullptr) == SM_ERR_INVALID_ARGUMENT);
  CHECK(sm_tf_size(nullptr) == 0);
  sm_tf_free(nullptr);
  sm_lock_trace_free(nullptr);
  sm_spectrum_free(nullptr);
  sm_config_free(nullptr);
}

TEST_CASE("transfer functions and the fit") {
  Config c;
  sm_tf* ratio = nullptr;
  REQUIRE(sm_tf_response(c.p, SM_RESPONSE_RATIO, &ratio) == SM_OK);
  REQUIRE(sm_tf_size(ratio) == 200);
  double f = 0, re = 0, im = 0;
  REQUIRE(sm_tf_get(ratio, 199, &f, &re, &im) == SM_OK);
  CHECK(f == doctest::Approx(2e6));
  CHECK(std::hypot(re, im) == doctest::Approx(static_cast<double>(fz::ratio_mag_2mhz)).epsilon(1e-12));
  CHECK(sm_tf_get(ratio, 200, &f, &re, &im) == SM_ERR_INVALID_ARGUMENT);

  sm_fit_result exact{};
  CHECK(sm_fit(c.p, ratio, &exact) == SM_OK);
  CHECK(exact.loss_cav_hat == doctest::Approx(85e-6).epsilon(1e-6));
  CHECK(exact.final_cost < 1e-18);
  sm_tf_free(ratio);

  sm_tf* noisy = nullptr;
  REQUIRE(sm_tf_synth(c.p, &noisy) == SM_OK);
  sm_fit_result fit{};
  CHECK(sm_fit(c.p, noisy, &fit) == SM_OK);
  CHECK(fit.converged == 1);
  CHECK(std::abs(fit.loss_cav_hat - 85e-6) < 5e-6);
  sm_tf_free(noisy);

  const double fs_[] = {1e3, 2e3, 3e3};
  const double res[] = {1, 1, 1};
  const double ims[] = {0, 0, 0};
  sm_tf* arr = nullptr;
  REQUIRE(sm_tf_from_arrays(fs_, res, ims, 3, &arr) == SM_OK);
  CHECK(sm_tf_size(arr) == 3);
  sm_tf_free(arr);
  const double unsorted[] = {3e3, 2e3, 1e3};
  CHECK(sm_tf_from_arrays(unsorted, res, ims, 3, &arr) == SM_ERR_INVALID_ARGUMENT);
  CHECK(sm_tf_read_csv("/nonexistent.csv", &arr) == SM_ERR_IO);
}

TEST_CASE("lock run handle") {
  Config c;
  sm_lock_trace* t = nullptr;
  REQUIRE(sm_lock_run(c.p, &t) == SM_OK);
  CHECK(sm_lock_trace_final_state(t) == SM_LOCK_SPEED_METER);
  REQUIRE(sm_lock_trace_transition_count(t) == 5);
  sm_lock_state from, to;
  double when = 0.0;
  REQUIRE(sm_lock_trace_transition(t, 4, &from, &to, &when) == SM_OK);
  CHECK(from == SM_LOCK_PLL_TUNING);
  CHECK(to == SM_LOCK_SPEED_METER);
  sm_lock_sample s{};
  REQUIRE(sm_lock_trace_sample(t, sm_lock_trace_size(t) - 1, &s) == SM_OK);
  CHECK(s.state == SM_LOCK_SPEED_METER);
  CHECK(s.dcpd1 < 1e-3);
  sm_lock_trace_free(t);

  CHECK(sm_config_set(c.p, "lock.duration", "0.05") == SM_OK);
  t = nullptr;
  CHECK(sm_lock_run(c.p, &t) == SM_NO_LOCK);
  REQUIRE(t != nullptr);
  CHECK(sm_lock_trace_final_state(t) != SM_LOCK_SPEED_METER);
  CHECK(sm_lock_trace_size(t) > 0);
  sm_lock_trace_free(t);
}

TEST_CASE("spectrum handle") {
  Config c;
  REQUIRE(sm_config_set(c.p, "spectrum.segment_length", "256") == SM_OK);
  std::vector<double> x(4096);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1e-9 * std::sin(2.0 * M_PI * 16.0 * i / 256.0);
  sm_spectrum* s = nullptr;
  REQUIRE(sm_spectrum_estimate(c.p, x.data(), x.size(), 256.0, &s) == SM_OK);
  CHECK(sm_spectrum_size(s) == 129);
  CHECK(sm_spectrum_total_rms(s) == doctest::Approx(1e-9 / std::sqrt(2.0)).epsilon(0.02));
  CHECK(sm_spectrum_rms_above(s, 32.0) < 1e-2 * sm_spectrum_total_rms(s));
  double f, asd, cum;
  REQUIRE(sm_spectrum_get(s, 16, &f, &asd, &cum) == SM_OK);
  CHECK(f == doctest::Approx(16.0));
  sm_spectrum_free(s);
  CHECK(sm_spectrum_estimate(c.p, x.data(), 10, 256.0, &s) != SM_OK);
}

TEST_CASE("file workflows") {
  TempDir dir;
  Config c;
  REQUIRE(sm_cmd_synth_tf(c.p, (dir / "tf.csv").c_str()) == SM_OK);
  REQUIRE(sm_cmd_fit(c.p, (dir / "tf.csv").c_str(), (dir / "fit.txt").c_str(), 0) == SM_OK);
  CHECK(std::string(sm_last_report()).find("converged = true") != std::string::npos);
  CHECK(sm_cmd_response(c.p, SM_RESPONSE_EXACT, (dir / "r.csv").c_str(), 1) == SM_OK);
  CHECK(fs::exists(dir / "r.gp"));
  CHECK(sm_cmd_fit(c.p, (dir / "none.csv").c_str(), (dir / "f.txt").c_str(), 0) == SM_ERR_IO);
  CHECK_FALSE(fs::exists(dir / "f.txt"));
}
