#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace speedmeter::model {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct PhysicalConstants {
  double c = 299792458.0;   // m/s
  double lambda0 = 1064e-9;  // m
};

// Main (arm) cavity. Transmissivities and loss are power fractions.
struct MainCavityParams {
  double t_itm = 4000e-6;
  double t_etm = 35e-6;
  double loss_cav = 85e-6;  // round-trip loss
  double l_cav = 0.15;      // m
};

// How an RMS length fluctuation of the circulation cavity becomes a phase.
enum class PhaseConvention { single_pass, round_trip };

// Polarization circulation cavity (QWP + PBS + circulation mirror).
struct PccParams {
  double t_pcm = 0.01;
  double loss_qwp = 0.0;
  double t_spbs = 0.0;
  double r_ppbs = 0.0;
  double loss_align = 0.0;
  double loss_mis = 0.0;
  double dphi_ret = kTwoPi * 7e-3;  // rad, QWP retardation error
  double dphi_pcc = 0.0;            // rad, RMS round-trip phase fluctuation
  double l_pcc = 0.38;              // m
  std::optional<double> loss_pcc_override = 0.03;
};

enum RateWarning : unsigned {
  kWarnNone = 0,
  kWarnUnderCoupled = 1u << 0,   // t_itm <= loss_cav
  kWarnOverdamped = 1u << 1,     // gamma_cut > gamma1
  kWarnPccLossClamped = 1u << 2,
};

// All angular quantities in rad/s.
struct DerivedRates {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma_cut = 0.0;
  double delta_ret = 0.0;
  double delta_pcc = 0.0;
  double finesse = 0.0;
  double tau = 0.0;  // storage time, s
  double f_c = 0.0;  // cavity pole, Hz
  unsigned warnings = kWarnNone;

  double detuning() const { return delta_ret + delta_pcc; }
};

struct PccLoss {
  double value = 0.0;
  bool clamped = false;
};

// Throws on parameters that leave their physical domain.
void validate(const PhysicalConstants& consts);
void validate(const MainCavityParams& cav);
void validate(const PccParams& pcc);

PccLoss effective_pcc_loss(const PccParams& pcc);

DerivedRates derive_rates(const PhysicalConstants& consts, const MainCavityParams& cav,
                          const PccParams& pcc);

// Phase conversion of an RMS length fluctuation, 2*pi*dl/lambda or 4*pi*dl/lambda.
double length_to_phase(double rms_length, double lambda0, PhaseConvention convention);

// Cavity amplitude reflectivity at sideband frequency omega (rad/s).
cplx reflectivity(const DerivedRates& rates, double omega);

// Position-meter response, normalized to unity at DC.
cplx position_response(const DerivedRates& rates, double omega);

// Second-circulation factor rho; phi_offset is the deviation from the pi operating point.
cplx circulation_factor(const DerivedRates& rates, const PccParams& pcc, double phi_offset,
                        double omega);

cplx speed_response_exact(const DerivedRates& rates, const PccParams& pcc, double phi_offset,
                          double omega);

// Linearized speed response built from gamma_cut and the total detuning.
cplx speed_response_firstorder(const DerivedRates& rates, double omega);

// Phase-quadrature projection (f(+w) - conj(f(-w))) / 2i.
cplx quadrature_map(cplx f_plus, cplx f_minus);

// Speed/position ratio observable at frequency f_hz.
cplx observable_H(const DerivedRates& rates, double f_hz, bool include_detuning);

// Exact counterpart of the ratio observable: speed_response_exact / position_response.
cplx observable_H_exact(const DerivedRates& rates, const PccParams& pcc, double phi_offset,
                        double f_hz);

// Frequency grid carrying complex values.
struct ComplexResponse {
  std::vector<double> freqs;
  std::vector<cplx> values;

  std::size_t size() const { return freqs.size(); }
  // Throws unless lengths match, freqs strictly increase and every value is finite.
  void validate() const;
};

// Configured form of the speed/position ratio used for synthesis and fitting.
enum class RatioKind { firstorder, exact };

struct RatioModel {
  PhysicalConstants consts;
  MainCavityParams cav;
  PccParams pcc;
  RatioKind kind = RatioKind::firstorder;
  // false: gamma_cut = gamma2, so loss_cav acts as an effective total loss.
  bool include_pcc_loss = false;
  bool include_detuning = false;
};

DerivedRates ratio_rates(const RatioModel& m);
ComplexResponse evaluate_ratio(const RatioModel& m, std::span<const double> freqs);

}  // namespace speedmeter::model
