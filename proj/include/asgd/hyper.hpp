#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "asgd/errors.hpp"

namespace asgd {

// Learning-rate and optimizer hyperparameters. Defaults follow the common
// single-worker SGD recipe (eta 0.1, heavy-ball 0.9, 5 warmup epochs,
// step decay 0.1); Adam moments default to 0.9/0.999 with eps 1e-8.
struct Hyper {
  double eta0 = 0.1;
  double eta_max = 0.1;              // Gap normalizer scale; usually eta0
  double gamma = 0.9;                // momentum coefficient
  bool nesterov = false;             // lookahead-gradient step instead of heavy ball
  double beta1 = 0.9;                // Adam first moment
  double beta2 = 0.999;              // Adam second moment
  double epsilon = 1e-8;             // Adam denominator offset
  double warmup_epochs = 5.0;
  double decay_factor = 0.1;
  std::vector<std::int64_t> decay_milestones;  // epochs
  double weight_decay = 0.0;         // applied inside the model gradient
  double c_beta = 0.999;             // C-estimator decay
  double c_epsilon = 1e-8;           // C-estimator offset
  bool momentum_correction = true;   // rescale momenta at milestone decays

  // Corollary-1 stepsize mode: when > 0, eta_k = batch * corollary_eta * G_k
  // (constant eta_k / G_k), overriding the warmup/decay schedule.
  double corollary_eta = 0.0;

  // allow_negative_gamma widens the momentum range for sweep mode
  void validate(bool allow_negative_gamma = false) const {
    if (!(eta0 > 0.0)) throw ConfigError("eta0 must be positive", "eta0");
    if (!(eta_max > 0.0)) throw ConfigError("eta_max must be positive", "eta_max");
    const double lo = allow_negative_gamma ? -1.0 : 0.0;
    if (!(gamma >= lo && gamma < 1.0))
      throw ConfigError("gamma out of range (negative momentum only in sweep mode)", "gamma");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 out of range", "beta1");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 out of range", "beta2");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive", "epsilon");
    if (!(warmup_epochs >= 0.0)) throw ConfigError("warmup_epochs must be >= 0", "warmup_epochs");
    if (!(decay_factor > 0.0 && decay_factor <= 1.0))
      throw ConfigError("decay_factor must be in (0, 1]", "decay_factor");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0", "weight_decay");
    if (!(c_beta >= 0.0 && c_beta < 1.0)) throw ConfigError("c_beta out of range", "c_beta");
  }
};

// Multiplicative decay accumulated from milestones passed by step k (0-based).
inline double milestone_multiplier(const Hyper& h, std::int64_t k, std::int64_t steps_per_epoch) {
  const std::int64_t epoch = k / steps_per_epoch;
  double mult = 1.0;
  for (const std::int64_t m : h.decay_milestones)
    if (epoch >= m) mult *= h.decay_factor;
  return mult;
}

// eta_k for 0-based step k: linear ramp from eta0/N to eta0 over
// warmup_epochs * steps_per_epoch steps, then piecewise constant with
// decay_factor applied at each milestone epoch.
inline double lr_at(const Hyper& h, std::int64_t k, std::int64_t n_workers,
                    std::int64_t steps_per_epoch) {
  const double warm_steps = h.warmup_epochs * static_cast<double>(steps_per_epoch);
  double eta = h.eta0;
  if (static_cast<double>(k) < warm_steps && warm_steps > 0.0) {
    const double start = h.eta0 / static_cast<double>(n_workers);
    eta = start + (h.eta0 - start) * static_cast<double>(k) / warm_steps;
  }
  return eta * milestone_multiplier(h, k, steps_per_epoch);
}

}  // namespace asgd
