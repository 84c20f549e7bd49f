#include "speedmeter/model.hpp"

#include <cmath>
#include <string>

#include "speedmeter/error.hpp"

namespace speedmeter::model {

namespace {

void require_fraction(double value, const char* name) {
  if (!(value >= 0.0 && value < 1.0)) {
    throw invalid_argument(std::string(name) + " must lie in [0, 1), got " + std::to_string(value));
  }
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw invalid_argument(std::string(name) + " must be positive, got " + std::to_string(value));
  }
}

}  // namespace

void validate(const PhysicalConstants& consts) {
  require_positive(consts.c, "c");
  require_positive(consts.lambda0, "lambda0");
}

void validate(const MainCavityParams& cav) {
  require_fraction(cav.t_itm, "t_itm");
  require_fraction(cav.t_etm, "t_etm");
  require_fraction(cav.loss_cav, "loss_cav");
  require_positive(cav.l_cav, "l_cav");
  if (cav.t_itm == 0.0) throw invalid_argument("t_itm must be nonzero (degenerate cavity)");
}

void validate(const PccParams& pcc) {
  require_fraction(pcc.t_pcm, "t_pcm");
  require_fraction(pcc.loss_qwp, "loss_qwp");
  require_fraction(pcc.t_spbs, "t_spbs");
  require_fraction(pcc.r_ppbs, "r_ppbs");
  require_fraction(pcc.loss_align, "loss_align");
  require_fraction(pcc.loss_mis, "loss_mis");
  if (pcc.loss_pcc_override) require_fraction(*pcc.loss_pcc_override, "loss_pcc_override");
  require_positive(pcc.l_pcc, "l_pcc");
  if (!(pcc.dphi_ret >= 0.0) || !std::isfinite(pcc.dphi_ret)) {
    throw invalid_argument("dphi_ret must be >= 0");
  }
  if (!(pcc.dphi_pcc >= 0.0) || !std::isfinite(pcc.dphi_pcc)) {
    throw invalid_argument("dphi_pcc must be >= 0");
  }
}

PccLoss effective_pcc_loss(const PccParams& pcc) {
  if (pcc.loss_pcc_override) return {*pcc.loss_pcc_override, false};
  const double sum = 2.0 * (pcc.loss_qwp + pcc.t_spbs + pcc.r_ppbs) + pcc.t_pcm + pcc.loss_align +
                     pcc.loss_mis;
  const double upper = std::nextafter(1.0, 0.0);
  if (sum > upper) return {upper, true};
  if (sum < 0.0) return {0.0, true};
  return {sum, false};
}

DerivedRates derive_rates(const PhysicalConstants& consts, const MainCavityParams& cav,
                          const PccParams& pcc) {
  validate(consts);
  validate(cav);
  validate(pcc);

  DerivedRates r;
  const double rate_scale = consts.c / (4.0 * cav.l_cav);
  r.gamma1 = rate_scale * cav.t_itm;
  r.gamma2 = rate_scale * cav.loss_cav;

  const PccLoss loss_pcc = effective_pcc_loss(pcc);
  r.gamma_cut = r.gamma2 + loss_pcc.value * r.gamma1 / 2.0;
  r.delta_ret = r.gamma1 * pcc.dphi_ret / 2.0;
  r.delta_pcc = r.gamma1 * pcc.dphi_pcc / 2.0;
  r.finesse = kTwoPi / (cav.t_itm + cav.loss_cav);
  r.tau = kTwoPi / r.gamma1;
  r.f_c = r.gamma1 / kTwoPi;

  if (cav.t_itm <= cav.loss_cav) r.warnings |= kWarnUnderCoupled;
  if (r.gamma_cut > r.gamma1) r.warnings |= kWarnOverdamped;
  if (loss_pcc.clamped) r.warnings |= kWarnPccLossClamped;
  return r;
}

double length_to_phase(double rms_length, double lambda0, PhaseConvention convention) {
  const double factor = convention == PhaseConvention::round_trip ? 2.0 * kTwoPi : kTwoPi;
  return factor * rms_length / lambda0;
}

cplx reflectivity(const DerivedRates& rates, double omega) {
  return cplx(rates.gamma1 - rates.gamma2, omega) / cplx(rates.gamma1 + rates.gamma2, -omega);
}

cplx position_response(const DerivedRates& rates, double omega) {
  return rates.gamma1 / cplx(rates.gamma1, -omega);
}

cplx circulation_factor(const DerivedRates& rates, const PccParams& pcc, double phi_offset,
                        double omega) {
  const double loss = effective_pcc_loss(pcc).value;
  return std::polar(1.0 - loss, phi_offset) * reflectivity(rates, omega);
}

cplx speed_response_exact(const DerivedRates& rates, const PccParams& pcc, double phi_offset,
                          double omega) {
  return (1.0 - circulation_factor(rates, pcc, phi_offset, omega)) / 2.0 *
         position_response(rates, omega);
}

cplx speed_response_firstorder(const DerivedRates& rates, double omega) {
  const cplx num(rates.gamma_cut, -(rates.detuning() + omega));
  return num / cplx(rates.gamma1, -omega) * position_response(rates, omega);
}

cplx quadrature_map(cplx f_plus, cplx f_minus) {
  return (f_plus - std::conj(f_minus)) / cplx(0.0, 2.0);
}

cplx observable_H(const DerivedRates& rates, double f_hz, bool include_detuning) {
  const double shift = include_detuning ? rates.detuning() / kTwoPi : 0.0;
  return cplx(rates.gamma_cut / kTwoPi, -(shift + f_hz)) / cplx(rates.gamma1 / kTwoPi, -f_hz);
}

cplx observable_H_exact(const DerivedRates& rates, const PccParams& pcc, double phi_offset,
                        double f_hz) {
  const double omega = kTwoPi * f_hz;
  return (1.0 - circulation_factor(rates, pcc, phi_offset, omega)) / 2.0;
}

void ComplexResponse::validate() const {
  if (freqs.size() != values.size()) {
    throw invalid_argument("frequency and value arrays differ in length");
  }
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!std::isfinite(freqs[i]) || !std::isfinite(values[i].real()) ||
        !std::isfinite(values[i].imag())) {
      throw invalid_argument("non-finite entry at index " + std::to_string(i));
    }
    if (i > 0 && !(freqs[i] > freqs[i - 1])) {
      throw invalid_argument("frequencies must be strictly increasing (index " +
                             std::to_string(i) + ")");
    }
  }
}

DerivedRates ratio_rates(const RatioModel& m) {
  DerivedRates rates = derive_rates(m.consts, m.cav, m.pcc);
  if (!m.include_pcc_loss) rates.gamma_cut = rates.gamma2;
  return rates;
}

ComplexResponse evaluate_ratio(const RatioModel& m, std::span<const double> freqs) {
  const DerivedRates rates = ratio_rates(m);
  PccParams pcc = m.pcc;
  if (!m.include_pcc_loss) pcc.loss_pcc_override = 0.0;
  const double phi = m.include_detuning ? pcc.dphi_ret + pcc.dphi_pcc : 0.0;

  ComplexResponse out;
  out.freqs.assign(freqs.begin(), freqs.end());
  out.values.reserve(freqs.size());
  for (double f : freqs) {
    out.values.push_back(m.kind == RatioKind::exact ? observable_H_exact(rates, pcc, phi, f)
                                                    : observable_H(rates, f, m.include_detuning));
  }
  return out;
}

}  // namespace speedmeter::model
