#include "speedmeter/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "speedmeter/error.hpp"

namespace speedmeter {

namespace {

using Setter = std::function<void(RunConfig&, std::string_view)>;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return std::string(v);
}

double parse_double(std::string_view v) {
  const std::string s = unquote(v);
  double out = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw Error(ErrorCode::parse, "expected a number, got '" + s + "'");
  }
  return out;
}

std::uint64_t parse_uint(std::string_view v) {
  const std::string s = unquote(v);
  std::uint64_t out = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw Error(ErrorCode::parse, "expected a non-negative integer, got '" + s + "'");
  }
  return out;
}

bool parse_bool(std::string_view v) {
  const std::string s = unquote(v);
  if (s == "true") return true;
  if (s == "false") return false;
  throw Error(ErrorCode::parse, "expected true or false, got '" + s + "'");
}

template <typename Enum>
Enum parse_enum(std::string_view v, std::initializer_list<std::pair<const char*, Enum>> names) {
  const std::string s = unquote(v);
  std::string allowed;
  for (const auto& [name, value] : names) {
    if (s == name) return value;
    allowed += allowed.empty() ? name : std::string(" | ") + name;
  }
  throw Error(ErrorCode::parse, "expected one of " + allowed + ", got '" + s + "'");
}

// "f_lo f_hi asd slope; f_lo f_hi asd slope; ..."
synth::AsdSpec parse_segments(std::string_view v) {
  const std::string s = unquote(v);
  synth::AsdSpec out;
  std::stringstream all(s);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (trim(item).empty()) continue;
    std::stringstream fields{std::string(trim(item))};
    std::string a, b, c, d, extra;
    fields >> a >> b >> c >> d;
    if (d.empty() || (fields >> extra)) {
      throw Error(ErrorCode::parse, "ASD segment needs 4 fields (f_lo f_hi asd slope): '" + item + "'");
    }
    out.push_back({parse_double(a), parse_double(b), parse_double(c), parse_double(d)});
  }
  if (out.empty()) throw Error(ErrorCode::parse, "ASD segment list is empty");
  return out;
}

#define SM_NUM(key, field) {key, [](RunConfig& c, std::string_view v) { c.field = parse_double(v); }}
#define SM_UINT(key, field) \
  {key, [](RunConfig& c, std::string_view v) { c.field = parse_uint(v); }}
#define SM_BOOL(key, field) \
  {key, [](RunConfig& c, std::string_view v) { c.field = parse_bool(v); }}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      SM_NUM("constants.c", model.consts.c),
      SM_NUM("constants.lambda0", model.consts.lambda0),

      SM_NUM("cavity.t_itm", model.cav.t_itm),
      SM_NUM("cavity.t_etm", model.cav.t_etm),
      SM_NUM("cavity.loss_cav", model.cav.loss_cav),
      SM_NUM("cavity.l_cav", model.cav.l_cav),

      SM_NUM("pcc.t_pcm", model.pcc.t_pcm),
      SM_NUM("pcc.loss_qwp", model.pcc.loss_qwp),
      SM_NUM("pcc.t_spbs", model.pcc.t_spbs),
      SM_NUM("pcc.r_ppbs", model.pcc.r_ppbs),
      SM_NUM("pcc.loss_align", model.pcc.loss_align),
      SM_NUM("pcc.loss_mis", model.pcc.loss_mis),
      SM_NUM("pcc.dphi_ret", model.pcc.dphi_ret),
      {"pcc.dphi_ret_cycles",
       [](RunConfig& c, std::string_view v) { c.model.pcc.dphi_ret = model::kTwoPi * parse_double(v); }},
      SM_NUM("pcc.dphi_pcc", model.pcc.dphi_pcc),
      {"pcc.dl_pcc_rms", [](RunConfig& c, std::string_view v) { c.dl_pcc_rms = parse_double(v); }},
      {"pcc.phase_convention",
       [](RunConfig& c, std::string_view v) {
         c.phase_convention =
             parse_enum<model::PhaseConvention>(v, {{"single_pass", model::PhaseConvention::single_pass},
                                                    {"round_trip", model::PhaseConvention::round_trip}});
       }},
      SM_NUM("pcc.l_pcc", model.pcc.l_pcc),
      {"pcc.loss_total",
       [](RunConfig& c, std::string_view v) {
         if (unquote(v) == "none") {
           c.model.pcc.loss_pcc_override.reset();
         } else {
           c.model.pcc.loss_pcc_override = parse_double(v);
         }
       }},

      {"model.kind",
       [](RunConfig& c, std::string_view v) {
         c.model.kind = parse_enum<model::RatioKind>(
             v, {{"firstorder", model::RatioKind::firstorder}, {"exact", model::RatioKind::exact}});
       }},
      SM_BOOL("model.include_pcc_loss", model.include_pcc_loss),
      SM_BOOL("model.include_detuning", model.include_detuning),

      SM_NUM("grid.f_min", grid.f_min),
      SM_NUM("grid.f_max", grid.f_max),
      SM_UINT("grid.n_points", grid.n_points),
      {"grid.spacing",
       [](RunConfig& c, std::string_view v) {
         c.grid.spacing = parse_enum<synth::Spacing>(
             v, {{"log", synth::Spacing::log}, {"linear", synth::Spacing::linear}});
       }},

      SM_NUM("synth.rel_amplitude_sigma", tf_noise.rel_amplitude_sigma),
      SM_NUM("synth.phase_sigma", tf_noise.phase_sigma),
      SM_UINT("synth.seed", tf_noise.seed),
      {"synth.gain_re",
       [](RunConfig& c, std::string_view v) { c.true_gain.real(parse_double(v)); }},
      {"synth.gain_im",
       [](RunConfig& c, std::string_view v) { c.true_gain.imag(parse_double(v)); }},

      SM_NUM("fit.anchor_lo", fit.anchor_band.first),
      SM_NUM("fit.anchor_hi", fit.anchor_band.second),
      SM_NUM("fit.init_loss", fit.init_loss),
      SM_NUM("fit.loss_lo", fit.loss_bounds.first),
      SM_NUM("fit.loss_hi", fit.loss_bounds.second),
      SM_NUM("fit.tol", fit.tol),
      SM_UINT("fit.max_iters", fit.max_iters),
      {"fit.fit_lo",
       [](RunConfig& c, std::string_view v) {
         if (!c.fit.fit_band) c.fit.fit_band = fit::Band{0.0, 1e300};
         c.fit.fit_band->first = parse_double(v);
       }},
      {"fit.fit_hi",
       [](RunConfig& c, std::string_view v) {
         if (!c.fit.fit_band) c.fit.fit_band = fit::Band{0.0, 1e300};
         c.fit.fit_band->second = parse_double(v);
       }},
      {"fit.mode",
       [](RunConfig& c, std::string_view v) {
         c.fit.mode = parse_enum<fit::FitMode>(
             v, {{"two_stage", fit::FitMode::two_stage}, {"joint", fit::FitMode::joint}});
       }},
      {"fit.weighting",
       [](RunConfig& c, std::string_view v) {
         c.fit.weighting = parse_enum<fit::Weighting>(
             v, {{"uniform", fit::Weighting::uniform}, {"relative", fit::Weighting::relative}});
       }},

      SM_NUM("green.lambda_gr", green.lambda_gr),
      SM_NUM("green.finesse_gr", green.finesse_gr),
      SM_NUM("green.t_pcm_gr", green.t_pcm_gr),
      SM_NUM("green.t_itm_gr", green.t_itm_gr),

      SM_NUM("lock.pcc_start_offset", plant.pcc_start_offset),
      SM_NUM("lock.initial_main_detuning", plant.initial_main_detuning),
      SM_NUM("lock.ir_visibility", plant.ir_visibility),
      SM_NUM("lock.gr_crosstalk", plant.gr_crosstalk),
      SM_NUM("lock.duration", lock_run.duration),
      SM_NUM("lock.dt", lock_run.dt),
      SM_UINT("lock.record_every", lock_run.record_every),
      SM_NUM("lock.disturbance_rms", lock_run.disturbance.rms),
      SM_NUM("lock.disturbance_corr_time", lock_run.disturbance.corr_time),
      SM_UINT("lock.seed", lock_run.seed),

      SM_NUM("servo.main_gain", servo.main.gain),
      SM_NUM("servo.main_threshold", servo.main.threshold),
      SM_NUM("servo.main_capture", servo.main.capture_range),
      SM_NUM("servo.main_hold", servo.main.hold_time),
      SM_NUM("servo.green_gain", servo.green.gain),
      SM_NUM("servo.green_threshold", servo.green.threshold),
      SM_NUM("servo.green_capture", servo.green.capture_range),
      SM_NUM("servo.green_hold", servo.green.hold_time),
      SM_NUM("servo.ir_gain", servo.ir.gain),
      SM_NUM("servo.ir_threshold", servo.ir.threshold),
      SM_NUM("servo.ir_capture", servo.ir.capture_range),
      SM_NUM("servo.ir_hold", servo.ir.hold_time),
      SM_NUM("servo.main_scan_rate", servo.main_scan_rate),
      SM_NUM("servo.pcc_scan_rate", servo.pcc_scan.rate),
      SM_NUM("servo.pcc_scan_span", servo.pcc_scan.span),
      SM_NUM("servo.lo_scan_rate", servo.lo_scan.rate),
      SM_NUM("servo.lo_scan_span", servo.lo_scan.span),
      SM_NUM("servo.settle_time", servo.settle_time),
      SM_NUM("servo.climb_step", servo.climb_step),
      SM_NUM("servo.climb_min_step", servo.climb_min_step),
      SM_NUM("servo.climb_dwell", servo.climb_dwell),
      SM_NUM("servo.ir_linewidth", servo.ir_linewidth),
      SM_NUM("servo.lock_loss_level", servo.lock_loss_level),

      SM_UINT("spectrum.segment_length", spectrum.segment_length),
      SM_NUM("spectrum.overlap", spectrum.overlap),
      {"spectrum.window",
       [](RunConfig& c, std::string_view v) {
         c.spectrum.window = parse_enum<noise::Window>(
             v, {{"hann", noise::Window::hann}, {"rectangular", noise::Window::rectangular}});
       }},
      SM_BOOL("spectrum.detrend", spectrum.detrend),
      SM_NUM("spectrum.readout_freq", spectrum.readout_freq),
      SM_NUM("spectrum.sample_rate", sample_rate),

      {"noise_synth.segments",
       [](RunConfig& c, std::string_view v) { c.noise_synth.segments = parse_segments(v); }},
      {"noise_synth.target_rms",
       [](RunConfig& c, std::string_view v) {
         if (unquote(v) == "none") {
           c.noise_synth.target_rms.reset();
         } else {
           c.noise_synth.target_rms = parse_double(v);
         }
       }},
      SM_NUM("noise_synth.duration", noise_synth.duration),
      SM_NUM("noise_synth.rate", noise_synth.rate),
      SM_UINT("noise_synth.seed", noise_synth.seed),
  };
  return table;
}

#undef SM_NUM
#undef SM_UINT
#undef SM_BOOL

bool known_section(std::string_view section) {
  const std::string prefix = std::string(section) + ".";
  const auto& table = setters();
  const auto it = table.lower_bound(prefix);
  return it != table.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

}  // namespace

void set_config_value(RunConfig& cfg, std::string_view dotted_key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(dotted_key);
  if (it == table.end()) {
    throw Error(ErrorCode::parse, "unknown config key '" + std::string(dotted_key) + "'");
  }
  try {
    it->second(cfg, trim(value));
  } catch (const Error& e) {
    throw Error(ErrorCode::parse, std::string(dotted_key) + ": " + e.what());
  }
}

void merge_config_text(RunConfig& cfg, std::string_view text, const std::string& origin) {
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
    // Comments start at '#' outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::parse, where() + "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_section(section)) {
        throw Error(ErrorCode::parse, where() + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::parse, where() + "expected key = value");
    if (section.empty()) throw Error(ErrorCode::parse, where() + "key outside of any [section]");
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::parse, where() + "duplicate key '" + key + "'");
    }
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::parse, where() + e.what());
    }
  }
}

void merge_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  merge_config_text(cfg, buf.str(), path);
}

std::string finalize(RunConfig& cfg) {
  std::string warnings;
  if (cfg.dl_pcc_rms) {
    if (cfg.model.pcc.dphi_pcc != 0.0) {
      throw invalid_argument("set either pcc.dphi_pcc or pcc.dl_pcc_rms, not both");
    }
    if (!(*cfg.dl_pcc_rms >= 0.0)) throw invalid_argument("pcc.dl_pcc_rms must be >= 0");
    cfg.model.pcc.dphi_pcc =
        model::length_to_phase(*cfg.dl_pcc_rms, cfg.model.consts.lambda0, cfg.phase_convention);
    cfg.dl_pcc_rms.reset();
  }

  const model::DerivedRates rates = model::derive_rates(cfg.model.consts, cfg.model.cav, cfg.model.pcc);
  if (rates.warnings & model::kWarnUnderCoupled) {
    warnings += "warning: t_itm <= loss_cav, the main cavity is not over-coupled\n";
  }
  if (rates.warnings & model::kWarnOverdamped) {
    warnings += "warning: gamma_cut exceeds gamma1 (overdamped speed response)\n";
  }
  if (rates.warnings & model::kWarnPccLossClamped) {
    warnings += "warning: circulation-cavity loss sum clamped below 1\n";
  }

  synth::make_grid(cfg.grid);
  if (!(cfg.tf_noise.rel_amplitude_sigma >= 0.0) || !(cfg.tf_noise.phase_sigma >= 0.0)) {
    throw invalid_argument("synth noise sigmas must be >= 0");
  }
  fit::validate(cfg.fit);

  if (!(cfg.green.lambda_gr > 0.0) || !(cfg.green.finesse_gr > 0.0)) {
    throw invalid_argument("green.lambda_gr and green.finesse_gr must be positive");
  }
  const double transmission_limit = model::kTwoPi / (cfg.green.t_pcm_gr + cfg.green.t_itm_gr);
  if (cfg.green.finesse_gr > transmission_limit) {
    warnings += "warning: green finesse exceeds the transmission-limited value\n";
  }
  cfg.plant.consts = cfg.model.consts;
  cfg.plant.l_pcc = cfg.model.pcc.l_pcc;
  cfg.plant.main_finesse = rates.finesse;
  cfg.plant.lambda_gr = cfg.green.lambda_gr;
  cfg.plant.finesse_gr = cfg.green.finesse_gr;
  lockacq::validate(cfg.plant);
  lockacq::validate(cfg.servo);
  if (!(cfg.lock_run.duration > 0.0) || !(cfg.lock_run.dt > 0.0) || cfg.lock_run.record_every == 0) {
    throw invalid_argument("lock.duration, lock.dt and lock.record_every must be positive");
  }

  noise::validate(cfg.spectrum);
  if (!(cfg.sample_rate > 0.0)) throw invalid_argument("spectrum.sample_rate must be positive");
  if (!(cfg.noise_synth.rate > 0.0) || !(cfg.noise_synth.duration > 0.0)) {
    throw invalid_argument("noise_synth.rate and noise_synth.duration must be positive");
  }
  return warnings;
}

void set_all_seeds(RunConfig& cfg, std::uint64_t seed) {
  cfg.tf_noise.seed = seed;
  cfg.lock_run.seed = seed;
  cfg.noise_synth.seed = seed;
}

}  // namespace speedmeter
