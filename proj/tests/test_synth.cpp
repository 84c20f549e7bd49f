#include <doctest.h>

#include <cmath>
#include <numeric>

#include "properties.hpp"
#include "speedmeter/error.hpp"
#include "speedmeter/noise.hpp"
#include "speedmeter/synth.hpp"

using namespace speedmeter;
using model::cplx;

namespace {

void check_suite(const props::Report& r) {
  INFO(r.name << ": " << r.first_failure);
  CHECK(r.cases >= props::kCases);
  CHECK(r.failures == 0);
}

}  // namespace

TEST_CASE("frequency grids") {
  const auto decades = synth::make_grid({1.0, 100.0, 3, synth::Spacing::log});
  REQUIRE(decades.size() == 3);
  CHECK(decades[0] == 1.0);
  CHECK(decades[1] == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(decades[2] == 100.0);

  const auto ends = synth::make_grid({4e3, 2e6, 2, synth::Spacing::log});
  CHECK(ends == std::vector<double>{4e3, 2e6});

  const auto lin = synth::make_grid({2.0, 10.0, 5, synth::Spacing::linear});
  CHECK(lin[2] == doctest::Approx(6.0));
  CHECK_THROWS_AS(synth::make_grid({0.0, 10.0, 5, synth::Spacing::linear}), Error);
  CHECK_THROWS_AS(synth::make_grid({0.0, 10.0, 5, synth::Spacing::log}), Error);
  CHECK_THROWS_AS(synth::make_grid({1.0, 10.0, 1, synth::Spacing::log}), Error);
  CHECK_THROWS_AS(synth::make_grid({10.0, 1.0, 4, synth::Spacing::log}), Error);

  const auto full = synth::make_grid({});
  CHECK(full.size() == 200);
  CHECK(full.front() == 4e3);
  CHECK(full.back() == 2e6);
}

TEST_CASE("synth_tf noise law") {
  model::RatioModel m;
  synth::FrequencyGrid grid;
  const auto ref = model::evaluate_ratio(m, synth::make_grid(grid));

  const auto clean = synth::synth_tf({m, cplx(1, 0)}, grid, {0.0, 0.0, 42});
  CHECK(clean.values == ref.values);

  const auto noisy = synth::synth_tf({m, cplx(1, 0)}, grid, {0.05, 0.0, 42});
  std::vector<double> dev;
  for (std::size_t i = 0; i < noisy.size(); ++i) dev.push_back(std::abs(noisy.values[i] / ref.values[i]) - 1.0);
  const double mean = std::accumulate(dev.begin(), dev.end(), 0.0) / dev.size();
  double ss = 0.0;
  for (double d : dev) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (dev.size() - 1));
  CHECK(sd >= 0.04);
  CHECK(sd <= 0.06);

  const auto phased = synth::synth_tf({m, cplx(1, 0)}, grid, {0.0, 0.1, 42});
  for (std::size_t i = 0; i < phased.size(); ++i) {
    CHECK(std::abs(std::abs(phased.values[i] / ref.values[i]) - 1.0) < 1e-12);
  }

  const auto a = synth::synth_tf({m, cplx(1, 0)}, grid, {0.05, 0.01, 7});
  const auto b = synth::synth_tf({m, cplx(1, 0)}, grid, {0.05, 0.01, 8});
  CHECK(a.values != b.values);

  const cplx g = std::polar(0.9, 0.1);
  const auto scaled = synth::synth_tf({m, g}, grid, {0.0, 0.0, 1});
  CHECK(std::abs(scaled.values[17] - g * ref.values[17]) < 1e-15);
}

TEST_CASE("ASD helpers") {
  const synth::AsdSpec spec{{0.0, 1.0, 2.0, 0.0}, {1.0, 100.0, 2.0, -1.0}};
  CHECK(synth::asd_at(spec, 0.5) == 2.0);
  CHECK(synth::asd_at(spec, 10.0) == doctest::Approx(0.2));
  CHECK(synth::asd_at(spec, 200.0) == 0.0);
  // 4 * 1 + 4 * (1 - 1/100)
  CHECK(synth::band_power(spec, 0.0, 100.0) == doctest::Approx(4.0 + 4.0 * 0.99));

  const synth::AsdSpec sloped_from_zero{{0.0, 50.0, 3.0, 0.5}};
  CHECK_THROWS_AS(synth::scale_to_rms(sloped_from_zero, 1.0, 50.0), Error);

  const auto scaled = synth::scale_to_rms(spec, 1e-10, 100.0);
  CHECK(std::sqrt(synth::band_power(scaled, 0.0, 100.0)) == doctest::Approx(1e-10).epsilon(1e-12));
}

TEST_CASE("noise series") {
  const synth::AsdSpec zero{{0.0, 64.0, 0.0, 0.0}};
  for (double v : synth::synth_noise_timeseries(zero, 16.0, 128.0, 3)) CHECK(v == 0.0);

  CHECK_THROWS_AS(synth::synth_noise_timeseries({}, 16.0, 128.0, 3), Error);
  const synth::AsdSpec gap{{0.0, 10.0, 1.0, 0.0}, {20.0, 64.0, 1.0, 0.0}};
  CHECK_THROWS_AS(synth::synth_noise_timeseries(gap, 16.0, 128.0, 3), Error);
  const synth::AsdSpec short_top{{0.0, 30.0, 1.0, 0.0}};
  CHECK_THROWS_AS(synth::synth_noise_timeseries(short_top, 16.0, 128.0, 3), Error);
  CHECK_THROWS_AS(synth::synth_noise_timeseries(zero, 1.0 / 256.0, 128.0, 3), Error);

  // Flat ASD round trip through the estimator.
  const double a0 = 3e-11;
  const synth::AsdSpec flat{{0.0, 128.0, a0, 0.0}};
  const auto x = synth::synth_noise_timeseries(flat, 512.0, 256.0, 5);
  CHECK(x.size() == 131072);
  noise::SpectrumConfig cfg;
  cfg.segment_length = 2048;
  const auto s = noise::estimate_asd(x, 256.0, cfg);
  for (std::size_t i = 2; i + 2 < s.asd.size(); ++i) {
    CHECK(std::abs(s.asd[i] / a0 - 1.0) < 0.15);
  }

  const synth::AsdSpec target = synth::scale_to_rms({{0.0, 1.0, 1.0, 0.0}, {1.0, 128.0, 1.0, -1.0}}, 1e-10, 128.0);
  const auto y = synth::synth_noise_timeseries(target, 1024.0, 256.0, 7);
  noise::SpectrumConfig dflt;
  const auto r = noise::estimate_asd(y, 256.0, dflt);
  CHECK(std::abs(r.total_rms / 1e-10 - 1.0) < 0.10);
}

TEST_CASE("synth property suites") {
  check_suite(props::synth_determinism());
  check_suite(props::synth_noiseless_passthrough());
  check_suite(props::synth_parseval());
}
