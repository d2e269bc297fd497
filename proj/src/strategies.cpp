#include "asgd/strategies.hpp"

#include <algorithm>
#include <cmath>

#include "asgd/errors.hpp"

namespace asgd {

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::ASGD_PLAIN: return "ASGD_PLAIN";
    case StrategyKind::NAG_ASGD: return "NAG_ASGD";
    case StrategyKind::SA_LR: return "SA_LR";
    case StrategyKind::SA_GRAD: return "SA_GRAD";
    case StrategyKind::GA: return "GA";
    case StrategyKind::DANA: return "DANA";
    case StrategyKind::DANA_SA: return "DANA_SA";
    case StrategyKind::DANA_GA: return "DANA_GA";
    case StrategyKind::ADAM: return "ADAM";
    case StrategyKind::ADAM_SA: return "ADAM_SA";
    case StrategyKind::ADAM_GA: return "ADAM_GA";
  }
  return "?";
}

StrategyKind strategy_from_string(const std::string& name) {
  if (name == "ASGD_PLAIN") return StrategyKind::ASGD_PLAIN;
  if (name == "NAG_ASGD") return StrategyKind::NAG_ASGD;
  if (name == "SA_LR") return StrategyKind::SA_LR;
  if (name == "SA_GRAD") return StrategyKind::SA_GRAD;
  if (name == "GA") return StrategyKind::GA;
  if (name == "DANA") return StrategyKind::DANA;
  if (name == "DANA_SA") return StrategyKind::DANA_SA;
  if (name == "DANA_GA") return StrategyKind::DANA_GA;
  if (name == "ADAM") return StrategyKind::ADAM;
  if (name == "ADAM_SA") return StrategyKind::ADAM_SA;
  if (name == "ADAM_GA") return StrategyKind::ADAM_GA;
  throw ConfigError("unknown strategy '" + name + "'", "strategy");
}

std::string to_string(GapMode mode) {
  switch (mode) {
    case GapMode::GLOBAL: return "global";
    case GapMode::LAYERWISE: return "layerwise";
    case GapMode::PARAMWISE: return "paramwise";
  }
  return "?";
}

GapMode gap_mode_from_string(const std::string& name) {
  if (name == "global") return GapMode::GLOBAL;
  if (name == "layerwise") return GapMode::LAYERWISE;
  if (name == "paramwise") return GapMode::PARAMWISE;
  throw ConfigError("unknown gap mode '" + name + "'", "gap_mode");
}

bool uses_delay(StrategyKind kind) {
  return kind == StrategyKind::SA_LR || kind == StrategyKind::SA_GRAD ||
         kind == StrategyKind::DANA_SA || kind == StrategyKind::ADAM_SA;
}

bool uses_gap(StrategyKind kind) {
  return kind == StrategyKind::GA || kind == StrategyKind::DANA_GA ||
         kind == StrategyKind::ADAM_GA;
}

bool is_dana(StrategyKind kind) {
  return kind == StrategyKind::DANA || kind == StrategyKind::DANA_SA ||
         kind == StrategyKind::DANA_GA;
}

bool is_adam(StrategyKind kind) {
  return kind == StrategyKind::ADAM || kind == StrategyKind::ADAM_SA ||
         kind == StrategyKind::ADAM_GA;
}

CEstimatorState CEstimatorState::make(GapMode mode, const LayerLayout& layout, const Hyper& h) {
  CEstimatorState c;
  c.mode = mode;
  c.eta_max = h.eta_max;
  c.beta = h.c_beta;
  c.eps = h.c_epsilon;
  c.k = 0;
  if (mode == GapMode::PARAMWISE)
    c.m = ParamVector(std::vector<double>(layout.dim(), 0.0), layout);
  else
    c.norm_mean.assign(mode == GapMode::GLOBAL ? 1 : layout.layers(), 0.0);
  return c;
}

void CEstimatorState::update(const ParamVector& v_step, const ParamVector& g) {
  k += 1;
  switch (mode) {
    case GapMode::PARAMWISE:
      for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = beta * m[i] + (1.0 - beta) * v_step[i] * v_step[i];
      break;
    case GapMode::GLOBAL:
      norm_mean[0] = beta * norm_mean[0] + (1.0 - beta) * l2_norm(g);
      break;
    case GapMode::LAYERWISE:
      for (std::size_t p = 0; p < g.layout.layers(); ++p)
        norm_mean[p] = beta * norm_mean[p] +
                       (1.0 - beta) * l2_norm_span(g, g.layout.begin_of(p), g.layout.end_of(p));
      break;
  }
}

ParamVector CEstimatorState::value(const LayerLayout& layout) const {
  ParamVector c(std::vector<double>(layout.dim(), eta_max * eps), layout);
  if (k == 0) return c;  // no updates yet: floor at eta_max * eps
  const double correction = 1.0 - std::pow(beta, static_cast<double>(k));
  switch (mode) {
    case GapMode::PARAMWISE:
      for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = eta_max * (std::sqrt(m[i] / correction) + eps);
      break;
    case GapMode::GLOBAL: {
      const double v = eta_max * (norm_mean[0] / correction + eps);
      for (double& x : c.values) x = v;
      break;
    }
    case GapMode::LAYERWISE:
      for (std::size_t p = 0; p < layout.layers(); ++p) {
        const double v = eta_max * (norm_mean[p] / correction + eps);
        for (std::size_t i = layout.begin_of(p); i < layout.end_of(p); ++i) c[i] = v;
      }
      break;
  }
  return c;
}

double CEstimatorState::scalar_value() const {
  if (mode != GapMode::GLOBAL) throw InvalidGap("scalar C only defined for GLOBAL mode");
  if (k == 0) return eta_max * eps;
  const double correction = 1.0 - std::pow(beta, static_cast<double>(k));
  return eta_max * (norm_mean[0] / correction + eps);
}

MasterState MasterState::init(StrategyKind kind, GapMode mode, const ParamVector& theta0,
                              std::int64_t n_workers, const Hyper& h) {
  MasterState s;
  s.k = 0;
  s.theta = theta0;
  if (!is_adam(kind) && !is_dana(kind)) s.v_global = ParamVector::zeros_like(theta0);
  if (is_dana(kind))
    s.v_per_worker.assign(static_cast<std::size_t>(n_workers), ParamVector::zeros_like(theta0));
  if (uses_delay(kind)) s.iter_array.assign(static_cast<std::size_t>(n_workers), 0);
  if (uses_gap(kind))
    s.sent_params.assign(static_cast<std::size_t>(n_workers), theta0);
  if (is_adam(kind)) {
    s.adam_m = ParamVector::zeros_like(theta0);
    s.adam_v = ParamVector::zeros_like(theta0);
  }
  if (uses_gap(kind)) s.c_state = CEstimatorState::make(mode, theta0.layout, h);
  return s;
}

std::int64_t compute_delay(const MasterState& state, std::int64_t worker_id) {
  const auto w = static_cast<std::size_t>(worker_id);
  if (w >= state.iter_array.size())
    throw UnsupportedStrategy("compute_delay: worker has no iteration record");
  const std::int64_t raw = (state.k + 1) - state.iter_array[w];
  return std::max<std::int64_t>(1, raw);
}

ParamVector compute_gap(GapMode mode, const ParamVector& theta_k, const ParamVector& theta_sent,
                        const ParamVector& c) {
  check_same_shape(theta_k, theta_sent, "compute_gap: dimension mismatch");
  check_same_shape(theta_k, c, "compute_gap: dimension mismatch");
  ParamVector g = ParamVector::zeros_like(theta_k);
  switch (mode) {
    case GapMode::GLOBAL: {
      if (!(c[0] > 0.0)) throw InvalidGap("compute_gap: non-positive C");
      double acc = 0.0;
      for (std::size_t i = 0; i < theta_k.size(); ++i) {
        const double d = theta_k[i] - theta_sent[i];
        acc += d * d;
      }
      const double val = std::sqrt(acc) / c[0] + 1.0;
      for (double& x : g.values) x = val;
      break;
    }
    case GapMode::LAYERWISE: {
      const LayerLayout& layout = theta_k.layout;
      for (std::size_t p = 0; p < layout.layers(); ++p) {
        const std::size_t b = layout.begin_of(p), e = layout.end_of(p);
        if (!(c[b] > 0.0)) throw InvalidGap("compute_gap: non-positive C");
        double acc = 0.0;
        for (std::size_t i = b; i < e; ++i) {
          const double d = theta_k[i] - theta_sent[i];
          acc += d * d;
        }
        const double val = std::sqrt(acc) / c[b] + 1.0;
        for (std::size_t i = b; i < e; ++i) g[i] = val;
      }
      break;
    }
    case GapMode::PARAMWISE:
      for (std::size_t i = 0; i < theta_k.size(); ++i) {
        if (!(c[i] > 0.0)) throw InvalidGap("compute_gap: non-positive C");
        g[i] = std::abs(theta_k[i] - theta_sent[i]) / c[i] + 1.0;
      }
      break;
  }
  return g;
}

namespace {

void gap_stats(const ParamVector& g, StepInfo& info) {
  double sum = 0.0, mx = g[0];
  for (const double x : g.values) {
    sum += x;
    mx = std::max(mx, x);
  }
  info.gap_mean = sum / static_cast<double>(g.size());
  info.gap_max = mx;
}

ParamVector momentum_family_step(StrategyKind kind, MasterState& state, const GradientMsg& msg,
                                 double eta, const Hyper& h, StepInfo& info) {
  const double gamma = kind == StrategyKind::ASGD_PLAIN ? 0.0 : h.gamma;
  double step_lr = eta;
  ParamVector g_eff = msg.g;

  if (uses_delay(kind)) {
    const std::int64_t raw = (state.k + 1) - state.iter_array[static_cast<std::size_t>(msg.worker_id)];
    const std::int64_t tau = std::max<std::int64_t>(1, raw);
    info.tau_raw = raw;
    info.tau = tau;
    if (kind == StrategyKind::SA_LR) step_lr = eta / static_cast<double>(tau);
    if (kind == StrategyKind::SA_GRAD)
      for (double& x : g_eff.values) x /= static_cast<double>(tau);
  }

  ParamVector& v = state.v_global;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = gamma * v[i] + g_eff[i];
  if (h.nesterov)
    for (std::size_t i = 0; i < v.size(); ++i)
      state.theta[i] -= step_lr * (gamma * v[i] + g_eff[i]);
  else
    for (std::size_t i = 0; i < v.size(); ++i) state.theta[i] -= step_lr * v[i];

  if (uses_delay(kind))
    state.iter_array[static_cast<std::size_t>(msg.worker_id)] = state.k + 1;
  return state.theta;
}

ParamVector ga_step(GapMode mode, MasterState& state, const GradientMsg& msg, double eta,
                    const Hyper& h, StepInfo& info) {
  const auto w = static_cast<std::size_t>(msg.worker_id);
  const ParamVector c = state.c_state.value(state.theta.layout);
  const ParamVector gap = compute_gap(mode, state.theta, state.sent_params[w], c);
  gap_stats(gap, info);

  const ParamVector g_pen = hadamard_div(msg.g, gap);
  ParamVector& v = state.v_global;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = h.gamma * v[i] + g_pen[i];
  if (h.nesterov)
    for (std::size_t i = 0; i < v.size(); ++i)
      state.theta[i] -= eta * (h.gamma * v[i] + g_pen[i]);
  else
    for (std::size_t i = 0; i < v.size(); ++i) state.theta[i] -= eta * v[i];

  state.c_state.update(v, msg.g);
  state.sent_params[w] = state.theta;
  return state.theta;
}

ParamVector dana_step(StrategyKind kind, GapMode mode, MasterState& state, const GradientMsg& msg,
                      double eta, const Hyper& h, StepInfo& info) {
  const auto w = static_cast<std::size_t>(msg.worker_id);
  ParamVector g_eff = msg.g;

  if (kind == StrategyKind::DANA_SA) {
    const std::int64_t raw = (state.k + 1) - state.iter_array[w];
    const std::int64_t tau = std::max<std::int64_t>(1, raw);
    info.tau_raw = raw;
    info.tau = tau;
    for (double& x : g_eff.values) x /= static_cast<double>(tau);
  } else if (kind == StrategyKind::DANA_GA) {
    const ParamVector c = state.c_state.value(state.theta.layout);
    const ParamVector gap = compute_gap(mode, state.theta, state.sent_params[w], c);
    gap_stats(gap, info);
    g_eff = hadamard_div(msg.g, gap);
  }

  ParamVector& vw = state.v_per_worker[w];
  for (std::size_t i = 0; i < vw.size(); ++i) vw[i] = h.gamma * vw[i] + g_eff[i];
  if (h.nesterov)
    for (std::size_t i = 0; i < vw.size(); ++i)
      state.theta[i] -= eta * (h.gamma * vw[i] + g_eff[i]);
  else
    for (std::size_t i = 0; i < vw.size(); ++i) state.theta[i] -= eta * vw[i];

  if (kind == StrategyKind::DANA_GA) state.c_state.update(vw, msg.g);

  // reply estimate: theta_{k+1} - eta * gamma * sum_j v^j (sum includes the
  // just-updated v^i)
  ParamVector estimate = state.theta;
  if (h.gamma != 0.0) {
    ParamVector sum_v = ParamVector::zeros_like(state.theta);
    for (const ParamVector& vj : state.v_per_worker)
      for (std::size_t i = 0; i < sum_v.size(); ++i) sum_v[i] += vj[i];
    for (std::size_t i = 0; i < estimate.size(); ++i) estimate[i] -= eta * h.gamma * sum_v[i];
  }

  if (kind == StrategyKind::DANA_SA) state.iter_array[w] = state.k + 1;
  if (kind == StrategyKind::DANA_GA) state.sent_params[w] = estimate;
  return estimate;
}

ParamVector adam_step(StrategyKind kind, GapMode mode, MasterState& state, const GradientMsg& msg,
                      double eta, const Hyper& h, StepInfo& info) {
  const auto w = static_cast<std::size_t>(msg.worker_id);
  const std::int64_t k1 = state.k + 1;  // 1-based Adam step for bias correction

  ParamVector first = msg.g;  // contribution to the first moment
  if (kind == StrategyKind::ADAM_SA) {
    const std::int64_t raw = k1 - state.iter_array[w];
    const std::int64_t tau = std::max<std::int64_t>(1, raw);
    info.tau_raw = raw;
    info.tau = tau;
    for (double& x : first.values) x /= static_cast<double>(tau);
  } else if (kind == StrategyKind::ADAM_GA) {
    const ParamVector c = state.c_state.value(state.theta.layout);
    const ParamVector gap = compute_gap(mode, state.theta, state.sent_params[w], c);
    gap_stats(gap, info);
    first = hadamard_div(msg.g, gap);
  }

  ParamVector& m = state.adam_m;
  ParamVector& v = state.adam_v;
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * first[i];
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * msg.g[i] * msg.g[i];  // raw gradient always
  }
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(k1));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(k1));

  ParamVector step_dir = ParamVector::zeros_like(state.theta);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    step_dir[i] = m_hat / (std::sqrt(v_hat) + h.epsilon);
    state.theta[i] -= eta * step_dir[i];
  }

  if (kind == StrategyKind::ADAM_SA) state.iter_array[w] = k1;
  if (kind == StrategyKind::ADAM_GA) {
    state.c_state.update(step_dir, msg.g);
    state.sent_params[w] = state.theta;
  }
  return state.theta;
}

}  // namespace

ParamVector master_step(StrategyKind kind, GapMode mode, MasterState& state,
                        const GradientMsg& msg, double eta_k, const Hyper& h, StepInfo* info) {
  check_same_shape(state.theta, msg.g, "master_step: gradient dimension mismatch");
  if (msg.worker_id < 0) throw UnsupportedStrategy("master_step: negative worker id");
  StepInfo local;
  StepInfo& inf = info ? *info : local;
  inf = StepInfo{};
  inf.eta = eta_k;

  ParamVector reply;
  switch (kind) {
    case StrategyKind::ASGD_PLAIN:
    case StrategyKind::NAG_ASGD:
    case StrategyKind::SA_LR:
    case StrategyKind::SA_GRAD:
      reply = momentum_family_step(kind, state, msg, eta_k, h, inf);
      break;
    case StrategyKind::GA:
      reply = ga_step(mode, state, msg, eta_k, h, inf);
      break;
    case StrategyKind::DANA:
    case StrategyKind::DANA_SA:
    case StrategyKind::DANA_GA:
      reply = dana_step(kind, mode, state, msg, eta_k, h, inf);
      break;
    case StrategyKind::ADAM:
    case StrategyKind::ADAM_SA:
    case StrategyKind::ADAM_GA:
      reply = adam_step(kind, mode, state, msg, eta_k, h, inf);
      break;
  }
  state.k += 1;
  return reply;
}

void apply_momentum_correction(MasterState& state, double milestone_mult) {
  if (milestone_mult == state.last_milestone_mult) return;
  const double ratio = milestone_mult / state.last_milestone_mult;
  state.last_milestone_mult = milestone_mult;
  for (double& x : state.v_global.values) x *= ratio;
  for (ParamVector& vw : state.v_per_worker)
    for (double& x : vw.values) x *= ratio;
}

}  // namespace asgd
