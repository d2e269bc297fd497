#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asgd/hyper.hpp"
#include "asgd/param_vector.hpp"

namespace asgd {

// Master-side update algorithms. ASGD_PLAIN is momentum-ASGD with gamma
// forced to zero; NAG_ASGD is the generic momentum master; SA_LR divides the
// step size by the delay, SA_GRAD divides the gradient; GA divides the
// gradient elementwise by the Gap. DANA keeps per-worker momentum and
// replies with a lookahead estimate. The Adam family penalizes only the
// first moment.
enum class StrategyKind {
  ASGD_PLAIN,
  NAG_ASGD,
  SA_LR,
  SA_GRAD,
  GA,
  DANA,
  DANA_SA,
  DANA_GA,
  ADAM,
  ADAM_SA,
  ADAM_GA,
};

enum class GapMode { GLOBAL, LAYERWISE, PARAMWISE };

std::string to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& name);
std::string to_string(GapMode mode);
GapMode gap_mode_from_string(const std::string& name);

bool uses_delay(StrategyKind kind);
bool uses_gap(StrategyKind kind);
bool is_dana(StrategyKind kind);
bool is_adam(StrategyKind kind);

struct GradientMsg {
  std::int64_t worker_id = 0;
  ParamVector g;
};

// Running normalizer C for the Gap. PARAMWISE follows the Adam-style
// second-moment recipe on the update step; GLOBAL and LAYERWISE keep
// bias-corrected exponential means of the (per-layer) gradient norm.
struct CEstimatorState {
  GapMode mode = GapMode::PARAMWISE;
  double eta_max = 0.1;
  double beta = 0.999;
  double eps = 1e-8;
  std::int64_t k = 0;
  ParamVector m;                  // PARAMWISE: EWMA of squared update steps
  std::vector<double> norm_mean;  // GLOBAL: 1 entry; LAYERWISE: per layer

  static CEstimatorState make(GapMode mode, const LayerLayout& layout, const Hyper& h);

  // Advance with this step's update vector (PARAMWISE) and raw gradient
  // (GLOBAL / LAYERWISE norm means).
  void update(const ParamVector& v_step, const ParamVector& g);

  // Current C. PARAMWISE: eta_max * (sqrt(m-hat) + eps) per parameter;
  // GLOBAL/LAYERWISE: eta_max * (norm-mean-hat + eps), broadcast over the
  // layout. Entrywise positive by construction.
  ParamVector value(const LayerLayout& layout) const;
  double scalar_value() const;  // GLOBAL only
};

// Per-strategy master state. Buffers that a strategy does not use stay empty.
struct MasterState {
  std::int64_t k = 0;  // completed master steps
  ParamVector theta;
  ParamVector v_global;                  // NAG/SA/GA momenta
  std::vector<ParamVector> v_per_worker; // DANA family
  std::vector<std::int64_t> iter_array;  // SA family bookkeeping
  std::vector<ParamVector> sent_params;  // GA family: last reply per worker
  ParamVector adam_m, adam_v;
  CEstimatorState c_state;
  double last_milestone_mult = 1.0;

  static MasterState init(StrategyKind kind, GapMode mode, const ParamVector& theta0,
                          std::int64_t n_workers, const Hyper& h);
};

// Per-step observables surfaced into the RunLog.
struct StepInfo {
  std::int64_t tau_raw = 1;  // k - iter[i] before clamping
  std::int64_t tau = 1;
  double gap_mean = 1.0;
  double gap_max = 1.0;
  double eta = 0.0;          // learning rate actually applied
};

// tau = max(1, k_next - iter[worker]) where k_next is the 1-based index of
// the step being processed. The caller saves iter[worker] afterwards.
std::int64_t compute_delay(const MasterState& state, std::int64_t worker_id);

// G for the configured mode; always >= 1 entrywise. C entries must be
// positive or InvalidGap is thrown.
ParamVector compute_gap(GapMode mode, const ParamVector& theta_k, const ParamVector& theta_sent,
                        const ParamVector& c);

// One master step: consumes the worker's gradient, mutates state (theta,
// momenta, bookkeeping, C estimator), and returns the parameters to send
// back to that worker. eta_k is the scheduled learning rate for this step.
ParamVector master_step(StrategyKind kind, GapMode mode, MasterState& state,
                        const GradientMsg& msg, double eta_k, const Hyper& h,
                        StepInfo* info = nullptr);

// Momentum correction: rescale momentum buffers when the milestone
// multiplier changes (discontinuous learning-rate drops only).
void apply_momentum_correction(MasterState& state, double milestone_mult);

}  // namespace asgd
