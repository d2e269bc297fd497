// Acceptance suite: one binary, one line per criterion.
//
// Every tolerance below is pinned from the project requirements. The suite
// is fully deterministic (fixed seeds, no network) and prints PASS/FAIL per
// criterion plus the measurements behind each verdict.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "asgd/analysis.hpp"
#include "asgd/config.hpp"
#include "asgd/simulator.hpp"

using namespace asgd;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::ostream&)> body;
};

std::vector<std::int64_t> sweep_ns() { return {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024}; }

// ---------------------------------------------------------------- 1 & 2 --

std::vector<SpeedupPoint> g_homo, g_hetero;

void run_speedup_tables() {
  const std::int64_t repeats = 20, iterations = 100000;
  g_homo = speedup_table(ExecTimeModel::homogeneous(), sweep_ns(), iterations, repeats, 1, 4);
  g_hetero = speedup_table(ExecTimeModel::heterogeneous(), sweep_ns(), iterations, repeats, 1, 4);
}

bool criterion1(std::ostream& out) {
  // Homogeneous async/SSGD ratio: 1.21 +- 0.03 at the curve's peak over
  // N in {1..1024} (20 repeats x 100000 iterations, V_mach = 0.1).
  double peak = 0.0;
  std::int64_t peak_n = 1;
  double attained = 0.0;
  std::int64_t attained_n = 0;
  out << "  homogeneous async/sync ratio by N:";
  for (const SpeedupPoint& p : g_homo) {
    out << " " << p.n_workers << ":" << p.async_over_sync;
    if (p.async_over_sync > peak) {
      peak = p.async_over_sync;
      peak_n = p.n_workers;
    }
    if (attained_n == 0 && std::abs(p.async_over_sync - 1.21) <= 0.03) {
      attained = p.async_over_sync;
      attained_n = p.n_workers;
    }
  }
  out << "\n  peak ratio " << peak << " at N = " << peak_n << " (required 1.21 +- 0.03)\n";
  if (attained_n > 0)
    out << "  note: the curve passes through the 1.21 +- 0.03 band at N = " << attained_n
        << " (ratio " << attained << "); it keeps climbing because E[max of N gamma draws]\n"
        << "  grows with N for any fixed-CV gamma, so the peak over the full sweep exceeds 1.21.\n";
  return std::abs(peak - 1.21) <= 0.03;
}

bool criterion2(std::ostream& out) {
  const SpeedupPoint& last = g_hetero.back();
  out << "  heterogeneous async/sync ratio at N = " << last.n_workers << ": "
      << last.async_over_sync << " (required 6 +- 1)\n";
  bool ok = std::abs(last.async_over_sync - 6.0) <= 1.0;
  for (const SpeedupPoint& p : g_homo) {
    if (p.n_workers > 64) continue;
    const double bound = 0.95 * static_cast<double>(p.n_workers);
    out << "  homogeneous async speedup N = " << p.n_workers << ": " << p.async_speedup
        << " (required >= " << bound << ")\n";
    ok = ok && p.async_speedup >= bound;
  }
  return ok;
}

// -------------------------------------------------------------------- 3 --

bool criterion3(std::ostream& out) {
  const int n = 1000000;

  ExecTimeModel homo = ExecTimeModel::homogeneous(128.0);
  RngStream mrng(2024, "accept-mach");
  homo.init_machines(1, mrng);
  RngStream rng(2024, "accept-tails");
  double sum = 0.0;
  int over = 0;
  for (int i = 0; i < n; ++i) {
    const double t = homo.sample_task_time(0, rng);
    sum += t;
    if (t > 160.0) ++over;
  }
  const double homo_mean = sum / n;
  const double homo_tail = static_cast<double>(over) / n;

  ExecTimeModel hetero = ExecTimeModel::heterogeneous(128.0);
  sum = 0.0;
  over = 0;
  for (int i = 0; i < n; ++i) {
    hetero.init_machines(1, mrng);  // fresh machine per draw: marginal law
    const double t = hetero.sample_task_time(0, rng);
    sum += t;
    if (t > 160.0) ++over;
  }
  const double hetero_mean = sum / n;
  const double hetero_tail = static_cast<double>(over) / n;

  out << "  homogeneous:  mean " << homo_mean << ", P(time > 160) = " << homo_tail
      << " (required 0.01 +- 0.005)\n";
  out << "  heterogeneous: mean " << hetero_mean << ", P(time > 160) = " << hetero_tail
      << " (required 0.279 +- 0.02)\n";
  return std::abs(homo_tail - 0.01) <= 0.005 && std::abs(hetero_tail - 0.279) <= 0.02 &&
         homo_mean > 127.0 && homo_mean < 129.0 && hetero_mean > 126.0 && hetero_mean < 130.0;
}

// -------------------------------------------------------------------- 4 --

ParamVector pv(std::vector<double> v) { return ParamVector(std::move(v)); }

bool criterion4(std::ostream& out) {
  bool ok = true;
  Hyper h;
  h.eta0 = 0.1;
  h.eta_max = 0.1;
  h.gamma = 0.9;

  // tau = 1: SA variants == NAG, bitwise, across a random step sequence
  {
    RngStream rng(81);
    std::vector<double> theta0(6);
    for (auto& x : theta0) x = rng.normal();
    MasterState nag = MasterState::init(StrategyKind::NAG_ASGD, GapMode::PARAMWISE, pv(theta0), 1, h);
    MasterState sal = MasterState::init(StrategyKind::SA_LR, GapMode::PARAMWISE, pv(theta0), 1, h);
    MasterState sag = MasterState::init(StrategyKind::SA_GRAD, GapMode::PARAMWISE, pv(theta0), 1, h);
    bool same = true;
    for (int i = 0; i < 50; ++i) {
      std::vector<double> g(6);
      for (auto& x : g) x = rng.normal();
      master_step(StrategyKind::NAG_ASGD, GapMode::PARAMWISE, nag, {0, pv(g)}, 0.1, h);
      master_step(StrategyKind::SA_LR, GapMode::PARAMWISE, sal, {0, pv(g)}, 0.1, h);
      master_step(StrategyKind::SA_GRAD, GapMode::PARAMWISE, sag, {0, pv(g)}, 0.1, h);
      same = same && nag.theta.values == sal.theta.values && nag.theta.values == sag.theta.values;
    }
    out << "  tau=1: SA_LR == SA_GRAD == NAG_ASGD bitwise over 50 steps: " << (same ? "yes" : "NO")
        << "\n";
    ok = ok && same;
  }

  // G = 1 reductions, bitwise
  {
    RngStream rng(82);
    std::vector<double> theta0(4), g(4);
    for (auto& x : theta0) x = rng.normal();
    for (auto& x : g) x = rng.normal();

    MasterState ga = MasterState::init(StrategyKind::GA, GapMode::PARAMWISE, pv(theta0), 1, h);
    MasterState nag = MasterState::init(StrategyKind::NAG_ASGD, GapMode::PARAMWISE, pv(theta0), 1, h);
    master_step(StrategyKind::GA, GapMode::PARAMWISE, ga, {0, pv(g)}, 0.1, h);
    master_step(StrategyKind::NAG_ASGD, GapMode::PARAMWISE, nag, {0, pv(g)}, 0.1, h);
    const bool ga_ok = ga.theta.values == nag.theta.values;

    MasterState dana = MasterState::init(StrategyKind::DANA, GapMode::PARAMWISE, pv(theta0), 2, h);
    MasterState dga = MasterState::init(StrategyKind::DANA_GA, GapMode::PARAMWISE, pv(theta0), 2, h);
    const ParamVector r1 = master_step(StrategyKind::DANA, GapMode::PARAMWISE, dana, {0, pv(g)}, 0.1, h);
    const ParamVector r2 = master_step(StrategyKind::DANA_GA, GapMode::PARAMWISE, dga, {0, pv(g)}, 0.1, h);
    const bool dana_ok = dana.theta.values == dga.theta.values && r1.values == r2.values;

    MasterState adam = MasterState::init(StrategyKind::ADAM, GapMode::PARAMWISE, pv(theta0), 1, h);
    MasterState aga = MasterState::init(StrategyKind::ADAM_GA, GapMode::PARAMWISE, pv(theta0), 1, h);
    master_step(StrategyKind::ADAM, GapMode::PARAMWISE, adam, {0, pv(g)}, 0.001, h);
    master_step(StrategyKind::ADAM_GA, GapMode::PARAMWISE, aga, {0, pv(g)}, 0.001, h);
    const bool adam_ok = adam.theta.values == aga.theta.values;

    out << "  G=1: GA==NAG " << (ga_ok ? "yes" : "NO") << ", DANA_GA==DANA "
        << (dana_ok ? "yes" : "NO") << ", ADAM_GA==ADAM " << (adam_ok ? "yes" : "NO") << "\n";
    ok = ok && ga_ok && dana_ok && adam_ok;
  }

  // N = 1 async == sequential for every strategy (logged losses, bitwise)
  {
    bool all_same = true;
    for (const StrategyKind strategy :
         {StrategyKind::ASGD_PLAIN, StrategyKind::NAG_ASGD, StrategyKind::SA_LR,
          StrategyKind::SA_GRAD, StrategyKind::GA, StrategyKind::DANA, StrategyKind::DANA_SA,
          StrategyKind::DANA_GA, StrategyKind::ADAM, StrategyKind::ADAM_SA,
          StrategyKind::ADAM_GA}) {
      RunConfig cfg;
      cfg.n_workers = 1;
      cfg.strategy = strategy;
      cfg.model.kind = ModelKind::Logistic;
      cfg.model.input_dim = 4;
      cfg.dataset_size = 128;
      cfg.batch_size = 16;
      cfg.epochs = 2;
      cfg.log_every = 1;
      cfg.seed = 23;
      const RunLog a = run_async(cfg);
      const RunLog s = run_sequential(cfg);
      bool same = a.summary.final_loss == s.summary.final_loss &&
                  a.records.size() == s.records.size();
      for (std::size_t i = 0; same && i < a.records.size(); ++i) {
        same = a.records[i].loss.has_value() == s.records[i].loss.has_value();
        if (same && a.records[i].loss) same = *a.records[i].loss == *s.records[i].loss;
      }
      if (!same) {
        out << "  N=1 async != sequential for " << to_string(strategy) << "\n";
        all_same = false;
      }
    }
    out << "  N=1 async == sequential for all 11 strategies: " << (all_same ? "yes" : "NO")
        << "\n";
    ok = ok && all_same;
  }
  return ok;
}

// -------------------------------------------------------------------- 5 --

bool criterion5(std::ostream& out) {
  bool ok = true;
  // theta_k == theta_{k-tau}, tau = 5: GA step equals the unpenalized step
  // and SA's step is exactly one fifth of it (eta chosen dyadic: 5/32).
  {
    const double eta = 0.15625;
    Hyper h;
    h.eta0 = eta;
    h.eta_max = eta;
    h.gamma = 0.0;
    const std::vector<double> theta0{0.5, -0.25};
    const std::vector<double> g{1.0, -2.0};

    MasterState nag = MasterState::init(StrategyKind::NAG_ASGD, GapMode::PARAMWISE, pv(theta0), 1, h);
    master_step(StrategyKind::NAG_ASGD, GapMode::PARAMWISE, nag, {0, pv(g)}, eta, h);

    MasterState ga = MasterState::init(StrategyKind::GA, GapMode::PARAMWISE, pv(theta0), 1, h);
    ga.k = 4;
    ga.sent_params[0] = pv(theta0);
    master_step(StrategyKind::GA, GapMode::PARAMWISE, ga, {0, pv(g)}, eta, h);

    MasterState sa = MasterState::init(StrategyKind::SA_LR, GapMode::PARAMWISE, pv(theta0), 1, h);
    sa.k = 4;  // tau = 5
    master_step(StrategyKind::SA_LR, GapMode::PARAMWISE, sa, {0, pv(g)}, eta, h);

    bool exact = ga.theta.values == nag.theta.values;
    for (std::size_t i = 0; i < theta0.size(); ++i)
      exact = exact && (sa.theta[i] - theta0[i]) == (nag.theta[i] - theta0[i]) / 5.0;
    out << "  over-penalization: GA step == unpenalized and SA step == (1/5) x, exactly: "
        << (exact ? "yes" : "NO") << "\n";
    ok = ok && exact;
  }

  // Appendix-style two-step expansion: the stale gradient re-enters with
  // coefficient -gamma eta / tau_{k+1} under SA_LR and -gamma eta / tau_k
  // under SA_GRAD.
  {
    const double eta = 0.1, gamma = 0.9;
    Hyper h;
    h.eta0 = eta;
    h.eta_max = eta;
    h.gamma = gamma;
    const std::int64_t tau1 = 5, tau2 = 2;

    auto two_step = [&](StrategyKind kind) {
      MasterState s = MasterState::init(kind, GapMode::PARAMWISE, pv({0.0}), 1, h);
      s.k = tau1 - 1;
      master_step(kind, GapMode::PARAMWISE, s, {0, pv({1.0})}, eta, h);
      const double theta1 = s.theta[0];
      s.k = s.k + tau2 - 1;
      s.iter_array[0] = s.k - tau2 + 1;
      master_step(kind, GapMode::PARAMWISE, s, {0, pv({0.0})}, eta, h);
      return s.theta[0] - theta1;
    };
    const double sa_lr_coeff = two_step(StrategyKind::SA_LR);
    const double sa_grad_coeff = two_step(StrategyKind::SA_GRAD);
    const double want_lr = -gamma * eta / static_cast<double>(tau2);
    const double want_grad = -gamma * eta / static_cast<double>(tau1);
    const bool lr_ok = std::abs(sa_lr_coeff - want_lr) <= 1e-12;
    const bool grad_ok = std::abs(sa_grad_coeff - want_grad) <= 1e-12;
    out << "  two-step stale coefficient: SA_LR " << sa_lr_coeff << " (want " << want_lr
        << "), SA_GRAD " << sa_grad_coeff << " (want " << want_grad << "), tol 1e-12: "
        << (lr_ok && grad_ok ? "yes" : "NO") << "\n";
    ok = ok && lr_ok && grad_ok;
  }
  return ok;
}

// -------------------------------------------------------------------- 6 --

bool criterion6(std::ostream& out) {
  bool ok = true;
  int kind_idx = 0;
  for (const ModelKind kind : {ModelKind::Quadratic, ModelKind::Logistic, ModelKind::Mlp1}) {
    ModelSpec spec;
    spec.kind = kind;
    spec.input_dim = kind == ModelKind::Logistic ? 8 : 4;
    spec.hidden_dim = 8;
    spec.weight_decay = 0.01;  // the Gap must divide the decay term too
    RngStream data_rng(90 + kind_idx, "data");
    const Dataset data = make_synthetic(spec, 64, data_rng);
    RngStream rng(95 + kind_idx, "probe");
    double worst = 0.0;
    for (int probe = 0; probe < 100; ++probe) {
      ParamVector theta(std::vector<double>(spec.param_dim()), spec.layout());
      for (double& x : theta.values) x = rng.normal();
      Batch batch;
      const std::size_t b = 1 + static_cast<std::size_t>(rng.uniform_below(16));
      for (std::size_t i = 0; i < b; ++i)
        batch.indices.push_back(static_cast<std::size_t>(rng.uniform_below(data.size())));
      const ParamVector g = grad(spec, theta, data, batch);
      const ParamVector fd = fd_grad(spec, theta, data, batch, 1e-5);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double denom = std::max({1.0, std::abs(g[i]), std::abs(fd[i])});
        worst = std::max(worst, std::abs(g[i] - fd[i]) / denom);
      }
    }
    out << "  " << to_string(kind) << ": max relative error over 100 probes = " << worst
        << " (required < 1e-5)\n";
    ok = ok && worst < 1e-5;
    ++kind_idx;
  }
  return ok;
}

// -------------------------------------------------------------------- 7 --

bool criterion7(std::ostream& out) {
  RunConfig cfg;
  cfg.n_workers = 16;
  cfg.strategy = StrategyKind::GA;
  cfg.gap_mode = GapMode::PARAMWISE;
  cfg.model.kind = ModelKind::Logistic;
  cfg.model.input_dim = 8;
  cfg.model.separation = 4.0;
  cfg.dataset_size = 2048;
  cfg.batch_size = 64;  // 32 steps per epoch
  cfg.epochs = 30;
  cfg.hyper.eta0 = 0.1;
  cfg.hyper.eta_max = 0.1;
  cfg.hyper.gamma = 0.9;
  cfg.exec = ExecTimeModel::homogeneous(64.0);
  cfg.seed = 7;
  const RunLog log = run_async(cfg);
  const GapDelaySummary s = gap_delay_summary(log);
  out << "  N=16 GA logistic: fraction of epochs with mean G < mean tau = "
      << s.fraction_gap_below_tau << " (required >= 0.9), min G = " << s.min_gap
      << ", min tau = " << s.min_tau << "\n";
  return s.fraction_gap_below_tau >= 0.9 && s.min_gap >= 1.0 && s.min_tau >= 1;
}

// -------------------------------------------------------------------- 8 --

bool criterion8(std::ostream& out) {
  // Noisy quadratic with every constant analytic: targets pinned at
  // center * ones (spread 0) so f* = 0, L = 1; per-sample gradient noise
  // sigma = 1 is the variance bound.
  RunConfig cfg;
  cfg.n_workers = 4;
  cfg.strategy = StrategyKind::GA;
  cfg.gap_mode = GapMode::GLOBAL;
  cfg.model.kind = ModelKind::Quadratic;
  cfg.model.input_dim = 4;
  cfg.model.quad_center = 2.0;  // f(theta_1 = 0) = 0.5 * ||2,2,2,2||^2 = 8
  cfg.model.quad_spread = 0.0;
  cfg.model.noise_sigma = 1.0;
  cfg.dataset_size = 64;
  cfg.batch_size = 8;
  cfg.steps = 40000;
  cfg.log_every = 1;
  cfg.seed = 29;
  cfg.hyper.gamma = 0.0;
  const double f1 = 8.0, lipschitz = 1.0, sigma = 1.0;
  cfg.hyper.corollary_eta =
      std::sqrt(f1 / (static_cast<double>(cfg.batch_size) * lipschitz *
                      static_cast<double>(cfg.steps) * sigma * sigma));

  const RunLog log = run_async(cfg);
  const BoundReport rep = bound_check(log, lipschitz, sigma, 0.0);
  out << "  f1 = " << rep.f1 << ", K = " << rep.steps << ", T = " << rep.t_bound
      << ", K threshold = " << rep.k_threshold
      << (rep.k_precondition ? " (met)" : " (NOT met)") << "\n";
  out << "  lhs = " << rep.lhs << " <= rhs = " << rep.rhs << " : "
      << (rep.lhs <= rep.rhs ? "yes" : "NO") << "\n";
  out << "  per-step stepsize condition max = " << rep.stepsize_condition_max
      << " (required <= 1)\n";
  return rep.satisfied && rep.stepsize_condition_max <= 1.0;
}

// -------------------------------------------------------------------- 9 --

bool criterion9(std::ostream& out) {
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  auto mean_final_loss = [&](StrategyKind strategy, bool* any_diverged) {
    double sum = 0.0;
    for (const std::uint64_t seed : seeds) {
      RunConfig cfg;
      cfg.n_workers = 32;
      cfg.strategy = strategy;
      cfg.gap_mode = GapMode::PARAMWISE;
      cfg.model.kind = ModelKind::Mlp1;
      cfg.model.input_dim = 4;
      cfg.model.hidden_dim = 8;
      cfg.model.teacher_scale = 3.0;
      cfg.model.target_noise = 0.1;
      cfg.dataset_size = 4096;
      cfg.batch_size = 64;  // 64 steps per epoch
      cfg.epochs = 24;
      cfg.hyper.eta0 = 0.06;
      cfg.hyper.eta_max = 0.06;
      cfg.hyper.gamma = 0.9;
      cfg.hyper.warmup_epochs = 5;
      cfg.hyper.decay_factor = 0.1;
      cfg.hyper.decay_milestones = {12, 18};
      cfg.exec = ExecTimeModel::homogeneous(64.0);
      cfg.seed = seed;
      const RunLog log = run_async(cfg);
      if (log.summary.diverged) {
        if (any_diverged) *any_diverged = true;
        sum += 1e300;  // divergence dominates any finite mean
      } else {
        sum += log.summary.final_loss;
      }
    }
    return sum / static_cast<double>(seeds.size());
  };

  bool nag_diverged = false;
  const double nag = mean_final_loss(StrategyKind::NAG_ASGD, &nag_diverged);
  const double sa = mean_final_loss(StrategyKind::SA_LR, nullptr);
  const double ga = mean_final_loss(StrategyKind::GA, nullptr);
  const double dana_ga = mean_final_loss(StrategyKind::DANA_GA, nullptr);

  out << "  mean final train loss over seeds {1..5}, N=32 mlp1:\n";
  out << "    NAG_ASGD = " << (nag >= 1e300 ? std::string("diverged") : std::to_string(nag))
      << (nag_diverged ? " (diverged on at least one seed)" : "") << "\n";
  out << "    SA_LR    = " << sa << "\n";
  out << "    GA       = " << ga << "\n";
  out << "    DANA_GA  = " << dana_ga << "\n";

  const bool ga_better = ga < sa;
  const bool dana_le = dana_ga <= ga;
  const bool nag_worst = nag_diverged || (nag > sa && nag > ga && nag > dana_ga);
  out << "  GA < SA_LR: " << (ga_better ? "yes" : "NO") << "; DANA_GA <= GA: "
      << (dana_le ? "yes" : "NO") << "; NAG diverges or is worst: " << (nag_worst ? "yes" : "NO")
      << "\n";
  return ga_better && dana_le && nag_worst;
}

// ------------------------------------------------------------------- 10 --

bool criterion10(std::ostream& out) {
  RunConfig cfg;
  cfg.n_workers = 8;
  cfg.strategy = StrategyKind::DANA_GA;
  cfg.model.kind = ModelKind::Mlp1;
  cfg.model.input_dim = 4;
  cfg.model.hidden_dim = 8;
  cfg.dataset_size = 256;
  cfg.batch_size = 32;
  cfg.epochs = 4;
  cfg.model.noise_sigma = 0.0;
  cfg.seed = 12345;
  const std::string a = run_async(cfg).to_jsonl();
  const std::string b = run_async(cfg).to_jsonl();
  cfg.seed = 54321;
  const std::string c = run_async(cfg).to_jsonl();
  out << "  identical config+seed: logs byte-identical: " << (a == b ? "yes" : "NO")
      << "; different seed differs: " << (a != c ? "yes" : "NO") << "\n";
  out << "  no network access is used anywhere in the suite (pure computation)\n";
  return a == b && a != c;
}

}  // namespace

int main() {
  std::printf("running speedup tables (criteria 1-2, ~20 repeats x 100k iterations)...\n");
  run_speedup_tables();

  const std::vector<Criterion> criteria{
      {"1. homogeneous async/SSGD speedup ratio peak 1.21 +- 0.03", criterion1},
      {"2. heterogeneous ratio 6 +- 1 at large N; async >= 0.95 N", criterion2},
      {"3. gamma tails: P(>160) = 1% +- 0.5pp homo, 27.9% +- 2pp hetero", criterion3},
      {"4. reduction identities, bitwise; N=1 async == sequential", criterion4},
      {"5. over/under-penalization exact constructions", criterion5},
      {"6. gradient oracle: rel err < 1e-5 over 100 probes per kind", criterion6},
      {"7. N=16 GA logistic: mean G < mean tau in >= 90% of epochs", criterion7},
      {"8. Corollary-1 bound and per-step stepsize condition", criterion8},
      {"9. qualitative ordering at N=32 (5 seeds)", criterion9},
      {"10. determinism: byte-identical logs for identical config+seed", criterion10},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::ostringstream detail;
    bool pass = false;
    try {
      pass = c.body(detail);
    } catch (const std::exception& e) {
      detail << "  exception: " << e.what() << "\n";
    }
    std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", c.name.c_str());
    std::fputs(detail.str().c_str(), stdout);
    if (!pass) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
