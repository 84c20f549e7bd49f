#include "speedmeter/lockacq.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "speedmeter/error.hpp"

namespace speedmeter::lockacq {

using model::kPi;
using model::kTwoPi;

namespace {

constexpr std::array<const char*, 6> kStateNames = {"Idle",        "MainLocked", "PccScanning",
                                                    "PccGrLocked", "PllTuning",  "SpeedMeter"};

// Fractional part of x mapped to a phase in [-pi, pi].
double wrapped_cycles(double x) { return kTwoPi * (x - std::round(x)); }

double wrap_phase(double phi) { return std::remainder(phi, kTwoPi); }

void require(bool ok, const char* what) {
  if (!ok) throw invalid_argument(what);
}

void validate_loop(const LoopConfig& loop, const char* name) {
  if (!(loop.gain > 0.0)) throw invalid_argument(std::string(name) + ".gain must be positive");
  if (!(loop.threshold > 0.0 && loop.threshold < 1.0)) {
    throw invalid_argument(std::string(name) + ".threshold must lie in (0, 1)");
  }
  if (!(loop.capture_range >= 0.0)) {
    throw invalid_argument(std::string(name) + ".capture_range must be >= 0");
  }
  if (!(loop.hold_time >= 0.0)) {
    throw invalid_argument(std::string(name) + ".hold_time must be >= 0");
  }
}

// Moves value toward target by at most max_step; returns true on arrival.
bool slew(double& value, double target, double max_step) {
  const double diff = target - value;
  if (std::abs(diff) <= max_step) {
    value = target;
    return true;
  }
  value += std::copysign(max_step, diff);
  return false;
}

void drop_locks(SimState& s) {
  const double actuator = s.ctrl.pcc_actuator;
  s.ctrl = ControllerState{};
  s.ctrl.pcc_actuator = actuator;
  s.lock = LockState::Idle;
}

void check_finite(const SimState& s) {
  const PlantState& p = s.plant;
  const std::array<std::pair<const char*, double>, 7> fields = {{
      {"main_detuning", p.main_detuning},
      {"pcc_length", p.pcc_length},
      {"gr_freq_offset", p.gr_freq_offset},
      {"ir_trans", p.ir_trans},
      {"gr_trans", p.gr_trans},
      {"dcpd1", p.dcpd1},
      {"pcc_actuator", s.ctrl.pcc_actuator},
  }};
  for (const auto& [name, value] : fields) {
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::numeric, std::string("non-finite ") + name + " at t = " +
                                          std::to_string(p.t) + " s in state " +
                                          to_string(s.lock));
    }
  }
}

}  // namespace

const char* to_string(LockState s) { return kStateNames[static_cast<std::size_t>(s)]; }

std::optional<LockState> parse_lock_state(std::string_view name) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (name == kStateNames[i]) return static_cast<LockState>(i);
  }
  return std::nullopt;
}

bool is_allowed_transition(LockState from, LockState to) {
  if (to == LockState::Idle) return from != LockState::Idle;
  return static_cast<int>(to) == static_cast<int>(from) + 1;
}

void validate(const PlantConfig& cfg) {
  model::validate(cfg.consts);
  require(cfg.main_finesse > 0.0, "main_finesse must be positive");
  require(cfg.lambda_gr > 0.0, "lambda_gr must be positive");
  require(cfg.finesse_gr > 0.0, "finesse_gr must be positive");
  require(cfg.l_pcc > 0.0, "l_pcc must be positive");
  require(std::isfinite(cfg.pcc_start_offset), "pcc_start_offset must be finite");
  require(std::abs(cfg.initial_main_detuning) <= kPi, "initial_main_detuning must lie in [-pi, pi]");
  require(cfg.ir_visibility >= 0.0 && cfg.ir_visibility <= 1.0, "ir_visibility must lie in [0, 1]");
  require(cfg.gr_crosstalk >= 0.0 && cfg.gr_crosstalk < 1.0, "gr_crosstalk must lie in [0, 1)");
}

void validate(const ServoConfig& cfg) {
  validate_loop(cfg.main, "main");
  validate_loop(cfg.green, "green");
  validate_loop(cfg.ir, "ir");
  require(cfg.main_scan_rate > 0.0, "main_scan_rate must be positive");
  require(cfg.pcc_scan.rate > 0.0 && cfg.pcc_scan.span > 0.0, "pcc scan rate and span must be positive");
  require(cfg.lo_scan.rate > 0.0 && cfg.lo_scan.span > 0.0, "lo scan rate and span must be positive");
  require(cfg.settle_time >= 0.0, "settle_time must be >= 0");
  require(cfg.climb_step > 0.0 && cfg.climb_min_step > 0.0, "climb steps must be positive");
  require(cfg.climb_dwell >= 0.0, "climb_dwell must be >= 0");
  require(cfg.ir_linewidth > 0.0, "ir_linewidth must be positive");
  require(cfg.lock_loss_level >= 0.0 && cfg.lock_loss_level < 1.0, "lock_loss_level must lie in [0, 1)");
}

double airy_transmission(double round_trip_phase, double finesse) {
  const double coeff = 2.0 * finesse / kPi;
  const double s = std::sin(round_trip_phase / 2.0);
  return 1.0 / (1.0 + coeff * coeff * s * s);
}

double pdh_error(double detuning, double linewidth) {
  const double x = detuning / linewidth;
  return detuning / (1.0 + x * x);
}

Optics evaluate_optics(const PlantConfig& cfg, double main_detuning, double pcc_length,
                       double gr_freq_offset) {
  Optics o;
  const double nu_gr = cfg.consts.c / cfg.lambda_gr + gr_freq_offset;
  o.gr_phase = wrapped_cycles(2.0 * pcc_length * nu_gr / cfg.consts.c);
  o.ir_deviation = wrapped_cycles(pcc_length / cfg.consts.lambda0 - 0.5);

  o.main_airy = airy_transmission(main_detuning, cfg.main_finesse);
  o.gr_airy = airy_transmission(o.gr_phase, cfg.finesse_gr);
  // Bright fraction at the detection port; zero at the pi operating point.
  const double bright = (1.0 - std::cos(o.ir_deviation)) / 2.0;
  o.ir_trans = o.main_airy * (1.0 - cfg.ir_visibility * bright);
  o.dcpd1 = o.main_airy * bright;
  o.gr_trans = o.gr_airy * (1.0 - cfg.gr_crosstalk * o.main_airy);
  return o;
}

SimState initial_state(const PlantConfig& cfg) {
  validate(cfg);
  SimState s;
  s.plant.main_detuning = cfg.initial_main_detuning;
  s.plant.pcc_length = cfg.l_pcc + cfg.pcc_start_offset;
  const Optics o = evaluate_optics(cfg, s.plant.main_detuning, s.plant.pcc_length, 0.0);
  s.plant.ir_trans = o.ir_trans;
  s.plant.gr_trans = o.gr_trans;
  s.plant.dcpd1 = o.dcpd1;
  return s;
}

SimState step(const SimState& state, const PlantConfig& plant, const ServoConfig& servos, double dt,
              double disturbance) {
  if (!(dt > 0.0)) throw invalid_argument("dt must be positive");
  SimState n = state;
  ControllerState& c = n.ctrl;
  PlantState& p = n.plant;
  p.t = state.plant.t + dt;

  const double base = plant.l_pcc + plant.pcc_start_offset;
  const auto length = [&] { return base + c.pcc_actuator + disturbance; };
  const Optics sensed = evaluate_optics(plant, p.main_detuning, length(), p.gr_freq_offset);

  const double main_lw = kPi / plant.main_finesse;
  const double gr_lw = kPi / plant.finesse_gr;
  const double nu_gr = plant.consts.c / plant.lambda_gr + p.gr_freq_offset;
  const double m_per_gr_rad = plant.consts.c / (4.0 * kPi * nu_gr);
  const double m_per_ir_rad = plant.consts.lambda0 / kTwoPi;

  // Lock loss.
  if (n.lock != LockState::Idle) {
    const bool green_held = n.lock == LockState::PccGrLocked ||
                            (n.lock == LockState::PllTuning && c.stage != TuneStage::handover);
    const bool ir_held = n.lock == LockState::SpeedMeter ||
                         (n.lock == LockState::PllTuning && c.stage == TuneStage::handover);
    if (sensed.main_airy < servos.lock_loss_level ||
        (green_held && sensed.gr_trans < servos.lock_loss_level) ||
        (ir_held && std::abs(sensed.ir_deviation) > kPi / 2.0)) {
      drop_locks(n);
    }
  }

  // (A) laser frequency to the main cavity: scan until captured, then integrate.
  if (!c.main_engaged) {
    p.main_detuning = wrap_phase(p.main_detuning + servos.main_scan_rate * dt);
    if (std::abs(p.main_detuning) < servos.main.capture_range &&
        sensed.main_airy >= servos.main.threshold) {
      c.main_engaged = true;
    }
  } else {
    p.main_detuning -= servos.main.gain * pdh_error(p.main_detuning, main_lw) * dt;
    if (std::abs(p.main_detuning) > kPi / 2.0) c.main_engaged = false;
  }

  // PCC length actuator.
  const auto green_servo = [&] {
    c.pcc_actuator -= servos.green.gain * pdh_error(sensed.gr_phase, gr_lw) * m_per_gr_rad * dt;
  };
  const auto ir_servo = [&] {
    c.pcc_actuator -=
        servos.ir.gain * pdh_error(sensed.ir_deviation, servos.ir_linewidth) * m_per_ir_rad * dt;
  };
  switch (n.lock) {
    case LockState::PccScanning:
      if (!c.green_engaged) {
        c.pcc_actuator += c.scan_dir * servos.pcc_scan.rate * dt;
        if (c.pcc_actuator >= servos.pcc_scan.span) {
          c.pcc_actuator = servos.pcc_scan.span;
          c.scan_dir = -1;
        } else if (c.pcc_actuator <= 0.0) {
          c.pcc_actuator = 0.0;
          c.scan_dir = 1;
        }
        if (std::abs(sensed.gr_phase) < servos.green.capture_range &&
            sensed.gr_trans >= servos.green.threshold) {
          c.green_engaged = true;
        }
      } else if (std::abs(sensed.gr_phase) > kPi / 2.0) {
        c.green_engaged = false;
      } else {
        green_servo();
      }
      break;
    case LockState::PccGrLocked:
      green_servo();
      break;
    case LockState::PllTuning:
      if (c.stage == TuneStage::handover) {
        ir_servo();
      } else {
        green_servo();
      }
      break;
    case LockState::SpeedMeter:
      ir_servo();
      break;
    default:
      break;
  }

  const Optics o = evaluate_optics(plant, p.main_detuning, length(), p.gr_freq_offset);
  p.pcc_length = length();
  p.ir_trans = o.ir_trans;
  p.gr_trans = o.gr_trans;
  p.dcpd1 = o.dcpd1;

  const auto advance = [&](LockState to) {
    n.lock = to;
    c.hold = 0.0;
    c.dwell = 0.0;
  };
  const auto hold_claim = [&](bool claim, double hold_time) {
    c.hold = claim ? c.hold + dt : 0.0;
    return claim && c.hold >= hold_time;
  };

  // Sequencing.
  switch (n.lock) {
    case LockState::Idle: {
      const bool claim = c.main_engaged && std::abs(p.main_detuning) < servos.main.capture_range &&
                         o.main_airy >= servos.main.threshold;
      if (hold_claim(claim, servos.main.hold_time)) advance(LockState::MainLocked);
      break;
    }
    case LockState::MainLocked:
      c.dwell += dt;
      if (c.dwell >= servos.settle_time) {
        advance(LockState::PccScanning);
        c.scan_dir = 1;
      }
      break;
    case LockState::PccScanning: {
      const bool claim = c.green_engaged && std::abs(o.gr_phase) < servos.green.capture_range &&
                         o.gr_trans >= servos.green.threshold;
      if (hold_claim(claim, servos.green.hold_time)) advance(LockState::PccGrLocked);
      break;
    }
    case LockState::PccGrLocked:
      c.dwell += dt;
      if (c.dwell >= servos.settle_time) {
        advance(LockState::PllTuning);
        c.stage = TuneStage::sweep;
        c.sweep_start = p.gr_freq_offset;
        c.best_offset = p.gr_freq_offset;
        c.best_ir = -1.0;
      }
      break;
    case LockState::PllTuning: {
      const double slew_step = servos.lo_scan.rate * dt;
      switch (c.stage) {
        case TuneStage::sweep:
          if (o.ir_trans > c.best_ir) {
            c.best_ir = o.ir_trans;
            c.best_offset = p.gr_freq_offset;
          }
          if (slew(p.gr_freq_offset, c.sweep_start + servos.lo_scan.span, slew_step)) {
            c.stage = TuneStage::return_to_best;
          }
          break;
        case TuneStage::return_to_best:
          if (slew(p.gr_freq_offset, c.best_offset, slew_step)) {
            c.stage = TuneStage::climb;
            c.accepted_offset = p.gr_freq_offset;
            c.target_offset = p.gr_freq_offset;
            c.accepted_ir = -1.0;
            c.climb_step = servos.climb_step;
            c.climb_dir = 1;
            c.reverting = false;
            c.dwell = 0.0;
          }
          break;
        case TuneStage::climb: {
          if (p.gr_freq_offset != c.target_offset) {
            slew(p.gr_freq_offset, c.target_offset, slew_step);
            c.dwell = 0.0;
            break;
          }
          c.dwell += dt;
          if (c.dwell < servos.climb_dwell) break;
          c.dwell = 0.0;
          if (c.accepted_ir < 0.0) {
            c.accepted_ir = o.ir_trans;
          } else if (c.reverting) {
            c.reverting = false;
            if (c.climb_step < servos.climb_min_step) {
              c.stage = TuneStage::handover;
              c.green_engaged = false;
              c.ir_engaged = true;
              c.hold = 0.0;
              break;
            }
          } else if (o.ir_trans > c.accepted_ir) {
            c.accepted_offset = p.gr_freq_offset;
            c.accepted_ir = o.ir_trans;
          } else {
            c.climb_dir = -c.climb_dir;
            c.climb_step /= 2.0;
            c.reverting = true;
            c.target_offset = c.accepted_offset;
            break;
          }
          c.target_offset = c.accepted_offset + c.climb_dir * c.climb_step;
          break;
        }
        case TuneStage::handover: {
          const bool claim = std::abs(o.ir_deviation) < servos.ir.capture_range &&
                             o.ir_trans >= servos.ir.threshold;
          if (hold_claim(claim, servos.ir.hold_time)) advance(LockState::SpeedMeter);
          break;
        }
      }
      break;
    }
    case LockState::SpeedMeter:
      break;
  }

  check_finite(n);
  return n;
}

std::vector<double> disturbance_series(const DisturbanceSpec& spec, double dt, std::size_t n,
                                       std::uint64_t seed) {
  if (!(spec.rms >= 0.0)) throw invalid_argument("disturbance rms must be >= 0");
  if (!(spec.corr_time > 0.0)) throw invalid_argument("disturbance corr_time must be positive");
  std::vector<double> out(n, 0.0);
  if (spec.rms == 0.0 || n == 0) return out;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a = std::exp(-dt / spec.corr_time);
  const double kick = spec.rms * std::sqrt(1.0 - a * a);
  double x = spec.rms * normal(rng);
  for (auto& v : out) {
    x = a * x + kick * normal(rng);
    v = x;
  }
  return out;
}

LockTrace run_acquisition(const PlantConfig& plant, const ServoConfig& servos,
                          const RunSettings& run) {
  validate(plant);
  validate(servos);
  if (!(run.duration > 0.0) || !(run.dt > 0.0)) {
    throw invalid_argument("duration and dt must be positive");
  }
  if (run.record_every == 0) throw invalid_argument("record_every must be >= 1");

  const auto n_steps = static_cast<std::size_t>(std::llround(run.duration / run.dt));
  const std::vector<double> noise = disturbance_series(run.disturbance, run.dt, n_steps, run.seed);

  LockTrace trace;
  SimState s = initial_state(plant);
  trace.samples.reserve(n_steps / run.record_every + 1);
  trace.states.reserve(n_steps / run.record_every + 1);
  trace.samples.push_back(s.plant);
  trace.states.push_back(s.lock);

  for (std::size_t i = 0; i < n_steps; ++i) {
    const LockState before = s.lock;
    s = step(s, plant, servos, run.dt, noise[i]);
    if (s.lock != before) trace.transitions.push_back({before, s.lock, s.plant.t});
    if ((i + 1) % run.record_every == 0) {
      trace.samples.push_back(s.plant);
      trace.states.push_back(s.lock);
    }
  }

  trace.final_state = s.lock;
  trace.final_sim = s;
  trace.success = s.lock == LockState::SpeedMeter;
  if (!trace.success) {
    trace.diagnostic = std::string("acquisition ended in state ") + to_string(s.lock) +
                       " after " + std::to_string(s.plant.t) + " s";
  }
  return trace;
}

}  // namespace speedmeter::lockacq
