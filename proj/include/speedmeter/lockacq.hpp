#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "speedmeter/model.hpp"

namespace speedmeter::lockacq {

// Acquisition sequence. Each state is only entered from its predecessor, or Idle on lock loss.
enum class LockState { Idle, MainLocked, PccScanning, PccGrLocked, PllTuning, SpeedMeter };

const char* to_string(LockState s);
std::optional<LockState> parse_lock_state(std::string_view name);
bool is_allowed_transition(LockState from, LockState to);

struct PlantState {
  double main_detuning = 0.0;   // main-cavity round-trip phase error, rad
  double pcc_length = 0.0;      // m
  double gr_freq_offset = 0.0;  // PLL LO offset of the green laser, Hz
  double ir_trans = 0.0;        // DCPD2, normalized
  double gr_trans = 0.0;        // RFPD2 DC, normalized
  double dcpd1 = 0.0;           // detection port, normalized
  double t = 0.0;               // s
};

struct PlantConfig {
  model::PhysicalConstants consts;
  double main_finesse = 1538.0;
  double lambda_gr = 532e-9;  // m
  double finesse_gr = 50.0;
  double l_pcc = 0.38;              // nominal circulation-cavity length, m
  double pcc_start_offset = 0.0;    // where the actuator starts relative to l_pcc, m
  double initial_main_detuning = -0.02;  // rad
  double ir_visibility = 0.9;  // depth of the IR transmission dip away from the operating point
  double gr_crosstalk = 0.05;  // residual IR leaking onto the green photodetector
};

void validate(const PlantConfig& cfg);

struct LoopConfig {
  double gain = 1e3;           // 1/s
  double threshold = 0.5;      // transmission needed to claim lock
  double capture_range = 0.1;  // |error| below which the servo engages, rad
  double hold_time = 5e-3;     // s the claim must persist
};

struct ScanConfig {
  double rate = 0.0;
  double span = 0.0;
};

// Loop bandwidths and trigger levels are not published; these defaults are chosen for the model.
struct ServoConfig {
  LoopConfig main{5e3, 0.5, 4e-3, 5e-3};   // (A) laser frequency to main cavity
  LoopConfig green{2e4, 0.5, 0.06, 5e-3};  // (B) PCC length to green frequency
  LoopConfig ir{2e4, 0.5, 0.3, 5e-3};      // final PCC lock to the IR operating point
  double main_scan_rate = 0.5;              // rad/s
  ScanConfig pcc_scan{2e-6, 1e-6};          // m/s, m (triangular)
  ScanConfig lo_scan{4e9, 1.6e9};           // Hz/s, Hz (C) PLL LO sweep
  double settle_time = 0.02;                // s between claiming a lock and the next step
  double climb_step = 2e6;                  // Hz, first LO hill-climb step
  double climb_min_step = 5e4;              // Hz
  double climb_dwell = 2e-3;                // s
  double ir_linewidth = 0.5;                // rad, width of the IR-derived error signal
  double lock_loss_level = 0.1;             // transmission below which a lock counts as lost
};

void validate(const ServoConfig& cfg);

enum class TuneStage { sweep, return_to_best, climb, handover };

// Servo integrators, timers and sequencing memory.
struct ControllerState {
  double pcc_actuator = 0.0;  // m, relative to l_pcc + pcc_start_offset
  bool main_engaged = false;
  bool green_engaged = false;
  bool ir_engaged = false;
  double hold = 0.0;
  double dwell = 0.0;
  int scan_dir = 1;
  TuneStage stage = TuneStage::sweep;
  double sweep_start = 0.0;
  double best_offset = 0.0;
  double best_ir = -1.0;
  double target_offset = 0.0;
  double accepted_offset = 0.0;
  double accepted_ir = 0.0;
  double climb_step = 0.0;
  int climb_dir = 1;
  bool reverting = false;
};

struct SimState {
  PlantState plant;
  ControllerState ctrl;
  LockState lock = LockState::Idle;
};

// Instantaneous optical readouts for a given plant configuration.
struct Optics {
  double main_airy = 0.0;
  double gr_airy = 0.0;
  double ir_trans = 0.0;
  double gr_trans = 0.0;
  double dcpd1 = 0.0;
  double gr_phase = 0.0;     // green round-trip phase, wrapped to [-pi, pi]
  double ir_deviation = 0.0; // IR circulation phase minus pi, wrapped to [-pi, pi]
};

Optics evaluate_optics(const PlantConfig& cfg, double main_detuning, double pcc_length,
                       double gr_freq_offset);

// 1 / (1 + (2F/pi)^2 sin^2(phi/2)).
double airy_transmission(double round_trip_phase, double finesse);

// Dispersion-shaped error d / (1 + (d/linewidth)^2): unit slope at 0, extrema at +-linewidth.
double pdh_error(double detuning, double linewidth);

SimState initial_state(const PlantConfig& cfg);

// Advances one sample. `disturbance` is the additive PCC length noise at the new time, m.
SimState step(const SimState& state, const PlantConfig& plant, const ServoConfig& servos, double dt,
              double disturbance);

struct DisturbanceSpec {
  double rms = 1e-9;         // m, band-limited PCC length noise
  double corr_time = 0.05;   // s
};

struct RunSettings {
  double duration = 2.0;
  double dt = 1e-5;
  std::size_t record_every = 10;
  DisturbanceSpec disturbance;
  std::uint64_t seed = 1;
};

struct Transition {
  LockState from;
  LockState to;
  double t;
};

struct LockTrace {
  std::vector<PlantState> samples;
  std::vector<LockState> states;
  std::vector<Transition> transitions;
  LockState final_state = LockState::Idle;
  SimState final_sim;
  bool success = false;
  std::string diagnostic;
};

// Ornstein-Uhlenbeck length noise sampled every dt, deterministic in seed.
std::vector<double> disturbance_series(const DisturbanceSpec& spec, double dt, std::size_t n,
                                       std::uint64_t seed);

LockTrace run_acquisition(const PlantConfig& plant, const ServoConfig& servos,
                          const RunSettings& run);

}  // namespace speedmeter::lockacq
