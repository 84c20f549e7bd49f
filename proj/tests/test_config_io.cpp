#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "properties.hpp"
#include "speedmeter/config.hpp"
#include "speedmeter/error.hpp"
#include "speedmeter/io.hpp"
#include "speedmeter/workflows.hpp"

using namespace speedmeter;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(SM_FIXTURES) + "/" + name; }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sm_cfg_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string parse_error(const std::string& text) {
  RunConfig cfg;
  try {
    merge_config_text(cfg, text, "t.cfg");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("shipped fixtures reproduce the built-in defaults") {
  RunConfig defaults;
  const std::string warn_defaults = finalize(defaults);

  RunConfig loaded;
  for (const char* f : {"table1.cfg", "table2.cfg", "acquisition.cfg", "fit_synthetic.cfg"}) {
    merge_config_file(loaded, fixture(f));
  }
  CHECK(finalize(loaded) == warn_defaults);

  const auto a = app::compute_response(defaults, app::ResponseMode::ratio);
  const auto b = app::compute_response(loaded, app::ResponseMode::ratio);
  CHECK(a.freqs == b.freqs);
  CHECK(a.values == b.values);
  CHECK(loaded.model.cav.loss_cav == defaults.model.cav.loss_cav);
  CHECK(loaded.model.pcc.dphi_ret == doctest::Approx(defaults.model.pcc.dphi_ret).epsilon(1e-15));
  CHECK(loaded.tf_noise.seed == defaults.tf_noise.seed);
  CHECK(loaded.fit.anchor_band == defaults.fit.anchor_band);
  CHECK(loaded.plant.finesse_gr == defaults.plant.finesse_gr);
  CHECK(loaded.servo.green.gain == defaults.servo.green.gain);
  CHECK(loaded.lock_run.duration == defaults.lock_run.duration);

  RunConfig noise;
  merge_config_file(noise, fixture("noise_out_of_loop.cfg"));
  CHECK(noise.noise_synth.seed == 11);
  CHECK(*noise.noise_synth.target_rms == 1e-10);
  RunConfig in_loop;
  merge_config_file(in_loop, fixture("noise_in_loop.cfg"));
  CHECK(*in_loop.noise_synth.target_rms == 7e-10);
}

TEST_CASE("strict parsing names the line and the key") {
  CHECK(contains(parse_error("[cavity]\nloss_cav = 1e-4\nloss_cvv = 2\n"), "t.cfg:3"));
  CHECK(contains(parse_error("[cavity]\nloss_cvv = 2\n"), "cavity.loss_cvv"));
  CHECK(contains(parse_error("[cavitee]\n"), "cavitee"));
  CHECK(contains(parse_error("loss_cav = 1\n"), "t.cfg:1"));
  CHECK(contains(parse_error("[cavity]\nloss_cav = abc\n"), "abc"));
  CHECK(contains(parse_error("[cavity]\nloss_cav = 1e-4 junk\n"), "t.cfg:2"));
  CHECK(contains(parse_error("[cavity]\nloss_cav = 1\nloss_cav = 2\n"), "t.cfg:3"));
  CHECK(contains(parse_error("[grid]\nn_points = -3\n"), "n_points"));
  CHECK(contains(parse_error("[grid]\nspacing = cubic\n"), "cubic"));
  CHECK(contains(parse_error("[spectrum]\ndetrend = maybe\n"), "maybe"));
  CHECK(contains(parse_error("[cavity]\nno equals sign\n"), "t.cfg:2"));
  CHECK(contains(parse_error("[noise_synth]\nsegments = \"1 2 3\"\n"), "segments"));

  RunConfig cfg;
  merge_config_text(cfg, "# comment\n\n[cavity]  # trailing\nloss_cav = 9e-5 # ppm\n", "ok.cfg");
  CHECK(cfg.model.cav.loss_cav == 9e-5);
  merge_config_text(cfg, "[pcc]\nloss_total = none\n", "ok.cfg");
  CHECK_FALSE(cfg.model.pcc.loss_pcc_override.has_value());

  set_config_value(cfg, "fit.max_iters", "7");
  CHECK(cfg.fit.max_iters == 7);
  CHECK_THROWS_AS(set_config_value(cfg, "fit.max_iter", "7"), Error);
  CHECK_THROWS_AS(set_config_value(cfg, "max_iters", "7"), Error);
}

TEST_CASE("finalize validates and converts") {
  RunConfig cfg;
  cfg.dl_pcc_rms = 1e-10;
  finalize(cfg);
  CHECK(cfg.model.pcc.dphi_pcc > 0.0);
  CHECK(cfg.plant.l_pcc == cfg.model.pcc.l_pcc);

  RunConfig bad;
  bad.grid.n_points = 1;
  CHECK_THROWS_AS(finalize(bad), Error);
  RunConfig bad_fit;
  bad_fit.fit.loss_bounds = {1e-3, 0.0};
  CHECK_THROWS_AS(finalize(bad_fit), Error);
  RunConfig bad_lock;
  bad_lock.lock_run.dt = -1.0;
  CHECK_THROWS_AS(finalize(bad_lock), Error);

  RunConfig seeded;
  set_all_seeds(seeded, 1234);
  CHECK(seeded.tf_noise.seed == 1234);
  CHECK(seeded.lock_run.seed == 1234);
  CHECK(seeded.noise_synth.seed == 1234);
}

TEST_CASE("number formatting") {
  CHECK(io::format_number(1.0) == "1.00000000e+00");
  CHECK(io::format_number(-6.5e-10) == "-6.50000000e-10");
  CHECK(io::format_number(0.0) == "0.00000000e+00");
}

TEST_CASE("transfer-function CSV round trip") {
  model::ComplexResponse tf;
  tf.freqs = {1e3, 1e4, 1e5};
  tf.values = {{0.5, -0.25}, {1.0, 0.0}, {-2e-3, 3e-7}};
  const std::string text = io::format_tf_csv(tf);
  CHECK(text.rfind("f_hz,re,im,mag,phase_deg\n", 0) == 0);
  const auto back = io::parse_tf_csv(text, "rt.csv");
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.freqs[i] == doctest::Approx(tf.freqs[i]).epsilon(1e-8));
    CHECK(std::abs(back.values[i] - tf.values[i]) <= 1e-8 * std::abs(tf.values[i]));
  }
  CHECK(io::format_tf_csv(back) == text);

  const auto no_header = io::parse_tf_csv("1,2,3\n2,4,5\n", "nh.csv");
  CHECK(no_header.size() == 2);
}

TEST_CASE("transfer-function CSV errors carry the line") {
  const auto err = [](const std::string& text) {
    try {
      io::parse_tf_csv(text, "d.csv");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(contains(err("f_hz,re,im\n1,2\n"), "d.csv:2"));
  CHECK(contains(err("f_hz,re,im\n1,2,3\n1,2,3\n"), "d.csv:3"));
  CHECK(contains(err("f_hz,re,im\n1,2,3\n2,x,3\n"), "d.csv:3"));
  CHECK(contains(err("f_hz,re,im\n1,nan,3\n"), "d.csv:2"));
  CHECK_FALSE(err("f_hz,re,im\n").empty());
}

TEST_CASE("time-series CSV") {
  const std::vector<double> v = {1e-10, -2e-10, 3e-10, 0.0};
  const std::string text = io::format_series_csv(v, 256.0);
  CHECK(text.rfind("t,length\n", 0) == 0);
  const auto s = io::parse_series_csv(text, "s.csv", 1.0);
  CHECK(s.rate == doctest::Approx(256.0).epsilon(1e-9));
  REQUIRE(s.values.size() == 4);
  CHECK(s.values[1] == doctest::Approx(-2e-10));

  const auto one = io::parse_series_csv("length\n1\n2\n3\n", "one.csv", 64.0);
  CHECK(one.rate == 64.0);
  CHECK(one.values == std::vector<double>{1, 2, 3});

  CHECK_THROWS_AS(io::parse_series_csv("0,1\n1,2\n3,3\n", "gap.csv", 1.0), Error);
  CHECK_THROWS_AS(io::parse_series_csv("0,1\n1,2\n2,q\n", "bad.csv", 1.0), Error);
}

TEST_CASE("atomic writes") {
  TempDir dir;
  const std::string path = dir / "out.csv";
  io::write_file_atomic(path, "first\n");
  io::write_file_atomic(path, "second\n");
  CHECK(io::read_file(path) == "second\n");
  CHECK_FALSE(fs::exists(path + ".tmp"));

  const std::string blocked = dir / "missing_dir/out.csv";
  try {
    io::write_file_atomic(blocked, "x");
    FAIL("write into a missing directory succeeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
  CHECK_FALSE(fs::exists(blocked));
  CHECK_FALSE(fs::exists(blocked + ".tmp"));
  CHECK_THROWS_AS(io::read_file(dir / "nope.csv"), Error);
}

TEST_CASE("workflows write their files") {
  TempDir dir;
  RunConfig cfg;
  finalize(cfg);

  const auto resp = app::run_response(cfg, app::ResponseMode::ratio, dir / "resp.csv", true);
  CHECK(resp.written.size() == 2);
  const auto parsed = io::parse_tf_csv(io::read_file(dir / "resp.csv"), "resp.csv");
  CHECK(parsed.size() == cfg.grid.n_points);
  CHECK(fs::exists(dir / "resp.gp"));

  app::run_synth_tf(cfg, dir / "tf.csv");
  const auto fit = app::run_fit(cfg, dir / "tf.csv", dir / "fit.txt", false);
  CHECK(fit.success);
  CHECK(contains(fit.report, "loss_cav_hat_ppm = "));
  CHECK(fs::exists(dir / "fit_residuals.csv"));
  CHECK(io::read_file(dir / "fit.txt") == fit.report);

  RunConfig noise_cfg;
  noise_cfg.noise_synth.duration = 256.0;
  noise_cfg.spectrum.segment_length = 4096;
  finalize(noise_cfg);
  app::run_synth_noise(noise_cfg, dir / "series.csv");
  const auto noise = app::run_noise(noise_cfg, dir / "series.csv", dir / "asd.csv", false);
  CHECK(contains(noise.report, "total_rms = "));
  CHECK(contains(noise.report, "detuning_readout_round_trip_hz = "));
  CHECK(io::read_file(dir / "asd_summary.txt") == noise.report);

  CHECK(app::output_stem("/a/b/c.csv") == "/a/b/c");
  CHECK(app::output_stem("c") == "c");
}

TEST_CASE("config property suite") {
  const auto r = props::config_strict_keys();
  INFO(r.name << ": " << r.first_failure);
  CHECK(r.cases >= props::kCases);
  CHECK(r.failures == 0);
}
