#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "speedmeter/model.hpp"

namespace speedmeter::fit {

using Band = std::pair<double, double>;  // [lo, hi] in Hz

enum class FitMode {
  two_stage,  // gain calibrated in the anchor band, loss minimized, repeated
  joint,      // gain solved by least squares at every trial loss
};

enum class Weighting { uniform, relative };

struct FitConfig {
  Band anchor_band{1.5e6, 2e6};
  double init_loss = 100e-6;
  Band loss_bounds{0.0, 1e-3};
  double tol = 1e-10;  // relative cost change
  std::size_t max_iters = 100;
  std::optional<Band> fit_band;  // all points when unset
  FitMode mode = FitMode::two_stage;
  Weighting weighting = Weighting::uniform;
};

void validate(const FitConfig& cfg);

struct FitResult {
  double loss_cav_hat = 0.0;
  model::cplx gain_hat{1.0, 0.0};
  double final_cost = 0.0;
  std::size_t n_iters = 0;
  bool converged = false;
  bool at_bound = false;           // the loss estimate sits on a bound
  std::vector<double> freqs;       // points used by the fit
  std::vector<model::cplx> residuals;  // data - gain * model
};

// Mean of data/model over the points inside band.
model::cplx calibrate_gain(const model::ComplexResponse& data,
                           const model::ComplexResponse& model_eval, Band band);

// Sum over the grid of |data - gain * model|^2, optionally weighted by 1/|data|^2.
double cost(const model::ComplexResponse& data, const model::ComplexResponse& model_eval,
            model::cplx gain, Weighting weighting = Weighting::uniform);

// Cost with the model evaluated at the trial loss.
double cost(const model::ComplexResponse& data, model::cplx gain, double loss_cav,
            const model::RatioModel& fixed, Weighting weighting = Weighting::uniform);

// Recovers the main-cavity loss (and the overall gain) from a measured ratio.
// loss_cav in `fixed` is ignored; every other parameter is held.
FitResult fit_loss(const model::ComplexResponse& data, const FitConfig& cfg,
                   const model::RatioModel& fixed);

}  // namespace speedmeter::fit
