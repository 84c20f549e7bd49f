#include "speedmeter/fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "golden_section.hpp"
#include "speedmeter/error.hpp"

namespace speedmeter::fit {

using model::ComplexResponse;
using model::cplx;

namespace {

void require_same_grid(const ComplexResponse& a, const ComplexResponse& b) {
  if (a.freqs.size() != b.freqs.size() || a.values.size() != b.values.size() ||
      a.freqs.size() != a.values.size()) {
    throw invalid_argument("data and model grids differ in length");
  }
  for (std::size_t i = 0; i < a.freqs.size(); ++i) {
    if (a.freqs[i] != b.freqs[i]) {
      throw invalid_argument("data and model grids differ at index " + std::to_string(i));
    }
  }
}

bool in_band(double f, Band band) { return f >= band.first && f <= band.second; }

ComplexResponse model_at(const model::RatioModel& fixed, double loss_cav,
                         const std::vector<double>& freqs) {
  model::RatioModel m = fixed;
  m.cav.loss_cav = loss_cav;
  return model::evaluate_ratio(m, freqs);
}

ComplexResponse restrict_to(const ComplexResponse& data, const std::optional<Band>& band) {
  if (!band) return data;
  ComplexResponse out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (in_band(data.freqs[i], *band)) {
      out.freqs.push_back(data.freqs[i]);
      out.values.push_back(data.values[i]);
    }
  }
  return out;
}

double weight(const cplx& d, Weighting w) {
  return w == Weighting::relative ? 1.0 / std::norm(d) : 1.0;
}

// Weighted least-squares gain for a fixed model shape.
cplx best_gain(const ComplexResponse& data, const ComplexResponse& model_eval, Weighting w) {
  cplx num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double wi = weight(data.values[i], w);
    num += wi * std::conj(model_eval.values[i]) * data.values[i];
    den += wi * std::norm(model_eval.values[i]);
  }
  if (!(den > 0.0)) throw invalid_argument("model vanishes on every data point");
  return num / den;
}

}  // namespace

void validate(const FitConfig& cfg) {
  const auto [lo, hi] = cfg.loss_bounds;
  if (!(lo >= 0.0 && lo < hi && hi < 1.0)) {
    throw invalid_argument("loss_bounds must satisfy 0 <= lo < hi < 1");
  }
  if (!(cfg.tol > 0.0)) throw invalid_argument("tol must be positive");
  if (cfg.max_iters == 0) throw invalid_argument("max_iters must be positive");
  if (!(cfg.anchor_band.first <= cfg.anchor_band.second)) {
    throw invalid_argument("anchor_band must be ordered");
  }
  if (cfg.fit_band && !(cfg.fit_band->first < cfg.fit_band->second)) {
    throw invalid_argument("fit_band must be ordered");
  }
  if (!(cfg.init_loss >= lo && cfg.init_loss <= hi)) {
    throw invalid_argument("init_loss must lie within loss_bounds");
  }
}

cplx calibrate_gain(const ComplexResponse& data, const ComplexResponse& model_eval, Band band) {
  require_same_grid(data, model_eval);
  cplx sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!in_band(data.freqs[i], band)) continue;
    sum += data.values[i] / model_eval.values[i];
    ++count;
  }
  if (count == 0) {
    throw invalid_argument("no data points inside the gain-calibration band [" +
                           std::to_string(band.first) + ", " + std::to_string(band.second) + "] Hz");
  }
  return sum / static_cast<double>(count);
}

double cost(const ComplexResponse& data, const ComplexResponse& model_eval, cplx gain,
            Weighting weighting) {
  require_same_grid(data, model_eval);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += weight(data.values[i], weighting) * std::norm(data.values[i] - gain * model_eval.values[i]);
  }
  return total;
}

double cost(const ComplexResponse& data, cplx gain, double loss_cav,
            const model::RatioModel& fixed, Weighting weighting) {
  return cost(data, model_at(fixed, loss_cav, data.freqs), gain, weighting);
}

FitResult fit_loss(const ComplexResponse& full_data, const FitConfig& cfg,
                   const model::RatioModel& fixed) {
  validate(cfg);
  full_data.validate();
  if (full_data.size() == 0) throw invalid_argument("no data points to fit");
  const ComplexResponse data = restrict_to(full_data, cfg.fit_band);
  if (data.size() == 0) throw invalid_argument("fit band excludes every data point");

  const auto [lo, hi] = cfg.loss_bounds;
  const double xtol = std::max(1e-15, (hi - lo) * 1e-13);
  const std::size_t golden_iters = 200;

  FitResult out;
  double loss = cfg.init_loss;
  cplx gain = 0.0;

  if (cfg.mode == FitMode::joint) {
    auto objective = [&](double l) {
      const ComplexResponse m = model_at(fixed, l, data.freqs);
      return cost(data, m, best_gain(data, m, cfg.weighting), cfg.weighting);
    };
    const auto best = detail::golden_section_minimize(objective, lo, hi, xtol, golden_iters);
    loss = best.x;
    gain = best_gain(data, model_at(fixed, loss, data.freqs), cfg.weighting);
    out.n_iters = 1;
    out.converged = best.converged;
  } else {
    gain = calibrate_gain(data, model_at(fixed, loss, data.freqs), cfg.anchor_band);
    double previous = cost(data, gain, loss, fixed, cfg.weighting);
    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
      auto objective = [&](double l) { return cost(data, gain, l, fixed, cfg.weighting); };
      const auto best = detail::golden_section_minimize(objective, lo, hi, xtol, golden_iters);
      loss = best.x;
      gain = calibrate_gain(data, model_at(fixed, loss, data.freqs), cfg.anchor_band);
      const double current = cost(data, gain, loss, fixed, cfg.weighting);
      out.n_iters = iter;
      // The absolute floor catches noiseless data, where the cost collapses to rounding level.
      const double change = std::abs(previous - current);
      if (change <= cfg.tol * std::max(previous, current) || current < 1e-30) {
        out.converged = best.converged;
        break;
      }
      previous = current;
    }
  }

  const ComplexResponse m = model_at(fixed, loss, data.freqs);
  out.loss_cav_hat = loss;
  out.gain_hat = gain;
  out.final_cost = cost(data, m, gain, cfg.weighting);
  out.at_bound = loss <= lo + xtol || loss >= hi - xtol;
  out.freqs = data.freqs;
  out.residuals.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.residuals[i] = data.values[i] - gain * m.values[i];
  }
  return out;
}

}  // namespace speedmeter::fit
