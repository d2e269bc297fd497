#include "asgd/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>
#include <vector>

#include "asgd/config.hpp"
#include "asgd/errors.hpp"

namespace asgd {

namespace {

// Without-replacement batches from a per-worker permutation, reshuffled
// whenever fewer than B indices remain.
class BatchSampler {
 public:
  BatchSampler(std::size_t m, std::uint64_t seed, std::int64_t worker)
      : rng_(seed, "batch", static_cast<std::uint64_t>(worker)), perm_(m) {
    for (std::size_t i = 0; i < m; ++i) perm_[i] = i;
    rng_.shuffle(perm_);
  }

  Batch next(std::size_t b) {
    if (cursor_ + b > perm_.size()) {
      rng_.shuffle(perm_);
      cursor_ = 0;
    }
    Batch out;
    out.indices.assign(perm_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                       perm_.begin() + static_cast<std::ptrdiff_t>(cursor_ + b));
    cursor_ += b;
    return out;
  }

 private:
  RngStream rng_;
  std::vector<std::size_t> perm_;
  std::size_t cursor_ = 0;
};

struct Engine {
  const RunConfig& cfg;
  Dataset data;
  ModelSpec spec;
  Hyper hyper;
  MasterState state;
  std::vector<ParamVector> worker_params;
  std::vector<std::int64_t> worker_version;  // master step that produced the params
  std::vector<BatchSampler> samplers;
  std::vector<RngStream> noise;
  Batch full;
  RunLog log;
  double tau_sum = 0.0, gap_sum = 0.0;
  std::int64_t max_tau = 0;
  bool diverged = false;

  explicit Engine(const RunConfig& c) : cfg(c), spec(c.model) {
    cfg.validate();
    spec.weight_decay = c.hyper.weight_decay;
    if (c.hyper.corollary_eta > 0.0 &&
        (c.strategy != StrategyKind::GA || c.gap_mode != GapMode::GLOBAL ||
         c.hyper.gamma != 0.0))
      throw ConfigError("corollary_eta requires strategy=GA, gap_mode=global, gamma=0",
                        "corollary_eta");

    RngStream data_rng(c.seed, "data");
    data = make_synthetic(spec, static_cast<std::size_t>(c.dataset_size), data_rng);
    RngStream init_rng(c.seed, "init");
    ParamVector theta0 = init_params(spec, init_rng);
    state = MasterState::init(c.strategy, c.gap_mode, theta0, c.n_workers, c.hyper);

    worker_params.assign(static_cast<std::size_t>(c.n_workers), theta0);
    worker_version.assign(static_cast<std::size_t>(c.n_workers), 0);
    for (std::int64_t w = 0; w < c.n_workers; ++w) {
      samplers.emplace_back(data.size(), c.seed, w);
      noise.emplace_back(c.seed, "noise", static_cast<std::uint64_t>(w));
    }
    full = full_batch(data);
    hyper = c.hyper;
    log.config_echo = canonical_config(c);
  }

  double scheduled_eta(std::int64_t k0) const {
    return lr_at(hyper, k0, cfg.n_workers, cfg.steps_per_epoch());
  }

  // eta for the step about to be processed; Corollary-1 mode sets
  // eta_k = B * corollary_eta * G_k so that eta_k / G_k stays constant.
  double effective_eta(std::int64_t worker) {
    if (hyper.corollary_eta <= 0.0) return scheduled_eta(state.k);
    const double c = state.c_state.scalar_value();
    ParamVector cvec(std::vector<double>(state.theta.size(), c), state.theta.layout);
    const ParamVector gap = compute_gap(GapMode::GLOBAL, state.theta,
                                        state.sent_params[static_cast<std::size_t>(worker)], cvec);
    return static_cast<double>(cfg.batch_size) * hyper.corollary_eta * gap[0];
  }

  bool process(std::int64_t worker, double now) {
    const std::int64_t k1 = state.k + 1;
    const auto w = static_cast<std::size_t>(worker);

    // FIFO causality: the gradient was computed on parameters this master
    // already sent.
    if (worker_version[w] >= k1)
      throw std::logic_error("FIFO violation: gradient from the future");

    Batch batch = samplers[w].next(static_cast<std::size_t>(cfg.batch_size));
    ParamVector g = grad(spec, worker_params[w], data, batch, &noise[w]);

    StepRecord rec;
    rec.k = k1;
    rec.time = now;
    rec.worker = worker;
    const bool log_full = (k1 == 1) || (k1 % cfg.log_stride() == 0) || (k1 == cfg.total_steps());
    if (log_full) {
      rec.loss = loss(spec, state.theta, data, full);
      ParamVector gf = grad(spec, state.theta, data, full, nullptr);
      const double n = l2_norm(gf);
      rec.grad_norm2 = n * n;
    }

    if (!g.finite()) {
      diverged = true;
      log.records.push_back(rec);
      return false;
    }

    if (hyper.momentum_correction && hyper.corollary_eta <= 0.0)
      apply_momentum_correction(state, milestone_multiplier(hyper, state.k, cfg.steps_per_epoch()));

    const double eta = effective_eta(worker);
    StepInfo info;
    GradientMsg msg{worker, std::move(g)};
    ParamVector reply = master_step(cfg.strategy, cfg.gap_mode, state, msg, eta, hyper, &info);

    rec.tau = info.tau;
    rec.tau_raw = info.tau_raw;
    rec.gap_mean = info.gap_mean;
    rec.gap_max = info.gap_max;
    rec.eta = info.eta;
    log.records.push_back(rec);

    tau_sum += static_cast<double>(info.tau);
    gap_sum += info.gap_mean;
    max_tau = std::max(max_tau, info.tau);

    if (!state.theta.finite()) {
      diverged = true;
      return false;
    }
    worker_params[w] = std::move(reply);
    worker_version[w] = k1;
    return true;
  }

  RunLog finish(double sim_time) {
    RunSummary s;
    s.steps = state.k;
    s.sim_time = sim_time;
    s.final_loss = loss(spec, state.theta, data, full);
    ParamVector gf = grad(spec, state.theta, data, full, nullptr);
    const double n = l2_norm(gf);
    s.final_grad_norm2 = n * n;
    s.final_accuracy = accuracy(spec, state.theta, data);
    s.diverged = diverged;
    const double steps = std::max<double>(1.0, static_cast<double>(state.k));
    s.mean_tau = tau_sum / steps;
    s.mean_gap = gap_sum / steps;
    s.max_tau = max_tau;
    log.summary = s;
    return std::move(log);
  }
};

struct PendingArrival {
  double time;
  std::uint64_t seq;
  std::int64_t worker;
  bool operator>(const PendingArrival& o) const {
    return std::tie(time, seq) > std::tie(o.time, o.seq);
  }
};

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Async: return "async";
    case RunMode::Ssgd: return "ssgd";
    case RunMode::Sequential: return "sequential";
  }
  return "?";
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "async") return RunMode::Async;
  if (name == "ssgd") return RunMode::Ssgd;
  if (name == "sequential") return RunMode::Sequential;
  throw ConfigError("unknown run mode '" + name + "'", "mode");
}

RunLog run_async(const RunConfig& cfg) {
  Engine eng(cfg);
  ExecTimeModel exec = cfg.exec;
  RngStream machine_rng(cfg.seed, "machines");
  exec.init_machines(cfg.n_workers, machine_rng);

  std::vector<RngStream> exec_rng;
  for (std::int64_t w = 0; w < cfg.n_workers; ++w)
    exec_rng.emplace_back(cfg.seed, "exec", static_cast<std::uint64_t>(w));

  std::priority_queue<PendingArrival, std::vector<PendingArrival>, std::greater<>> queue;
  std::uint64_t seq = 0;
  for (std::int64_t w = 0; w < cfg.n_workers; ++w)
    queue.push({exec.sample_task_time(w, exec_rng[static_cast<std::size_t>(w)]), seq++, w});

  const std::int64_t total = cfg.total_steps();
  double now = 0.0;
  while (eng.state.k < total) {
    const PendingArrival ev = queue.top();
    queue.pop();
    if (ev.time < now) throw std::logic_error("simulated clock moved backwards");
    now = ev.time;
    if (!eng.process(ev.worker, now)) break;
    queue.push(
        {now + exec.sample_task_time(ev.worker, exec_rng[static_cast<std::size_t>(ev.worker)]),
         seq++, ev.worker});
  }
  return eng.finish(now);
}

RunLog run_ssgd(const RunConfig& cfg) {
  Engine eng(cfg);
  ExecTimeModel exec = cfg.exec;
  RngStream machine_rng(cfg.seed, "machines");
  exec.init_machines(cfg.n_workers, machine_rng);
  std::vector<RngStream> exec_rng;
  for (std::int64_t w = 0; w < cfg.n_workers; ++w)
    exec_rng.emplace_back(cfg.seed, "exec", static_cast<std::uint64_t>(w));

  const std::int64_t total = cfg.total_steps();
  double now = 0.0;
  for (std::int64_t it = 0; it < total; ++it) {
    double round = 0.0;
    for (std::int64_t w = 0; w < cfg.n_workers; ++w)
      round = std::max(round, exec.sample_task_time(w, exec_rng[static_cast<std::size_t>(w)]));
    now += round;

    // aggregate (mean) gradient over all workers, every worker at the
    // current parameters: no staleness
    const std::int64_t k1 = eng.state.k + 1;
    ParamVector g_sum = ParamVector::zeros_like(eng.state.theta);
    bool finite = true;
    for (std::int64_t w = 0; w < cfg.n_workers; ++w) {
      const auto wi = static_cast<std::size_t>(w);
      Batch batch = eng.samplers[wi].next(static_cast<std::size_t>(cfg.batch_size));
      ParamVector g = grad(eng.spec, eng.state.theta, eng.data, batch, &eng.noise[wi]);
      finite = finite && g.finite();
      if (finite) scale_add_inplace(g_sum, g, 1.0);
    }
    for (double& x : g_sum.values) x /= static_cast<double>(cfg.n_workers);

    StepRecord rec;
    rec.k = k1;
    rec.time = now;
    rec.worker = 0;
    const bool log_full = (k1 == 1) || (k1 % cfg.log_stride() == 0) || (k1 == total);
    if (log_full) {
      rec.loss = loss(eng.spec, eng.state.theta, eng.data, eng.full);
      ParamVector gf = grad(eng.spec, eng.state.theta, eng.data, eng.full, nullptr);
      const double n = l2_norm(gf);
      rec.grad_norm2 = n * n;
    }
    if (!finite) {
      eng.diverged = true;
      eng.log.records.push_back(rec);
      break;
    }

    if (eng.hyper.momentum_correction)
      apply_momentum_correction(
          eng.state, milestone_multiplier(eng.hyper, eng.state.k, cfg.steps_per_epoch()));
    const double eta = eng.scheduled_eta(eng.state.k);
    StepInfo info;
    GradientMsg msg{0, std::move(g_sum)};
    master_step(cfg.strategy, cfg.gap_mode, eng.state, msg, eta, eng.hyper, &info);

    rec.tau = info.tau;
    rec.tau_raw = info.tau_raw;
    rec.gap_mean = info.gap_mean;
    rec.gap_max = info.gap_max;
    rec.eta = info.eta;
    eng.log.records.push_back(rec);
    eng.tau_sum += static_cast<double>(info.tau);
    eng.gap_sum += info.gap_mean;
    eng.max_tau = std::max(eng.max_tau, info.tau);

    if (!eng.state.theta.finite()) {
      eng.diverged = true;
      break;
    }
  }
  return eng.finish(now);
}

RunLog run_sequential(const RunConfig& cfg) {
  RunConfig seq_cfg = cfg;
  seq_cfg.mode = RunMode::Sequential;
  Engine eng(seq_cfg);
  const std::int64_t total = cfg.total_steps();
  while (eng.state.k < total) {
    if (!eng.process(0, 0.0)) break;
  }
  return eng.finish(0.0);
}

RunLog run(const RunConfig& cfg) {
  switch (cfg.mode) {
    case RunMode::Async: return run_async(cfg);
    case RunMode::Ssgd: return run_ssgd(cfg);
    case RunMode::Sequential: return run_sequential(cfg);
  }
  throw ConfigError("unknown run mode");
}

}  // namespace asgd
