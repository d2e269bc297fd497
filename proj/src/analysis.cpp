#include "asgd/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <queue>
#include <sstream>
#include <thread>
#include <tuple>

#include "asgd/config.hpp"
#include "asgd/errors.hpp"
#include "asgd/strategies.hpp"

namespace asgd {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t stream_index(std::int64_t n, std::int64_t repeat, std::int64_t worker) {
  return (static_cast<std::uint64_t>(n) << 40) ^ (static_cast<std::uint64_t>(repeat) << 20) ^
         static_cast<std::uint64_t>(worker);
}

ExecTimeModel machines_for(const ExecTimeModel& base, std::int64_t n, std::int64_t repeat,
                           std::uint64_t seed) {
  ExecTimeModel exec = base;
  RngStream rng(seed, "speedup-mach", stream_index(n, repeat, 0));
  exec.init_machines(n, rng);
  return exec;
}

// wall time of the `iterations`-th completion across n pipelined workers
double async_wall(const ExecTimeModel& exec, std::int64_t n, std::int64_t repeat,
                  std::int64_t iterations, std::uint64_t seed) {
  std::vector<RngStream> rng;
  rng.reserve(static_cast<std::size_t>(n));
  for (std::int64_t w = 0; w < n; ++w)
    rng.emplace_back(seed, "speedup-exec", stream_index(n, repeat, w));

  using Entry = std::tuple<double, std::int64_t>;  // (completion time, worker)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::int64_t w = 0; w < n; ++w)
    queue.emplace(exec.sample_task_time(w, rng[static_cast<std::size_t>(w)]), w);

  double now = 0.0;
  for (std::int64_t i = 0; i < iterations; ++i) {
    const auto [t, w] = queue.top();
    queue.pop();
    now = t;
    queue.emplace(now + exec.sample_task_time(w, rng[static_cast<std::size_t>(w)]), w);
  }
  return now;
}

// total wall time of ceil-free `iterations / n` synchronous rounds and the
// number of batches they complete
std::pair<double, std::int64_t> sync_wall(const ExecTimeModel& exec, std::int64_t n,
                                          std::int64_t repeat, std::int64_t iterations,
                                          std::uint64_t seed) {
  std::vector<RngStream> rng;
  rng.reserve(static_cast<std::size_t>(n));
  for (std::int64_t w = 0; w < n; ++w)
    rng.emplace_back(seed, "speedup-exec", stream_index(n, repeat, w));

  const std::int64_t rounds = std::max<std::int64_t>(1, iterations / n);
  double total = 0.0;
  for (std::int64_t r = 0; r < rounds; ++r) {
    double slowest = 0.0;
    for (std::int64_t w = 0; w < n; ++w)
      slowest = std::max(slowest, exec.sample_task_time(w, rng[static_cast<std::size_t>(w)]));
    total += slowest;
  }
  return {total, rounds * n};
}

struct Cell {
  double async_tp = 0.0;
  double sync_tp = 0.0;
  double ref_tp = 0.0;  // N = 1 async throughput with the same repeat seed
};

}  // namespace

std::vector<SpeedupPoint> speedup_table(const ExecTimeModel& exec,
                                        const std::vector<std::int64_t>& ns,
                                        std::int64_t iterations, std::int64_t repeats,
                                        std::uint64_t seed, int threads) {
  if (iterations < 1) throw ConfigError("iterations must be >= 1", "iterations");
  if (repeats < 1) throw ConfigError("repeats must be >= 1", "repeats");
  exec.validate();

  struct Task {
    std::int64_t n;
    std::int64_t repeat;
  };
  std::vector<Task> tasks;
  for (const std::int64_t n : ns) {
    if (n < 1) throw ConfigError("worker counts must be >= 1", "Ns");
    for (std::int64_t r = 0; r < repeats; ++r) tasks.push_back({n, r});
  }
  std::vector<Cell> cells(tasks.size());

  auto work = [&](std::size_t i) {
    const auto [n, r] = tasks[i];
    const ExecTimeModel machines = machines_for(exec, n, r, seed);
    const double wall = async_wall(machines, n, r, iterations, seed);
    const auto [sync_total, sync_batches] = sync_wall(machines, n, r, iterations, seed);
    const ExecTimeModel ref_machines = machines_for(exec, 1, r, seed);
    const double ref_wall = async_wall(ref_machines, 1, r, iterations, seed);
    Cell c;
    c.async_tp = static_cast<double>(iterations) / wall;
    c.sync_tp = static_cast<double>(sync_batches) / sync_total;
    c.ref_tp = static_cast<double>(iterations) / ref_wall;
    cells[i] = c;
  };

  if (threads <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int count = std::min<int>(threads, static_cast<int>(tasks.size()));
    for (int t = 0; t < count; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) work(i);
      });
    for (std::thread& t : pool) t.join();
  }

  std::vector<SpeedupPoint> out;
  std::size_t cursor = 0;
  for (const std::int64_t n : ns) {
    double async_sum = 0.0, sync_sum = 0.0, ref_sum = 0.0;
    for (std::int64_t r = 0; r < repeats; ++r, ++cursor) {
      async_sum += cells[cursor].async_tp;
      sync_sum += cells[cursor].sync_tp;
      ref_sum += cells[cursor].ref_tp;
    }
    SpeedupPoint p;
    p.n_workers = n;
    p.async_throughput = async_sum / static_cast<double>(repeats);
    p.sync_throughput = sync_sum / static_cast<double>(repeats);
    const double ref = ref_sum / static_cast<double>(repeats);
    p.async_speedup = p.async_throughput / ref;
    p.sync_speedup = p.sync_throughput / ref;
    p.async_over_sync = p.async_throughput / p.sync_throughput;
    out.push_back(p);
  }
  return out;
}

std::string speedup_csv(ExecRegime regime, const std::vector<SpeedupPoint>& points,
                        bool with_header) {
  std::string out;
  if (with_header)
    out += "regime,N,async_throughput,sync_throughput,async_speedup,sync_speedup,async_over_sync\n";
  for (const SpeedupPoint& p : points) {
    out += to_string(regime);
    out += ',' + std::to_string(p.n_workers);
    out += ',' + fmt(p.async_throughput);
    out += ',' + fmt(p.sync_throughput);
    out += ',' + fmt(p.async_speedup);
    out += ',' + fmt(p.sync_speedup);
    out += ',' + fmt(p.async_over_sync);
    out += '\n';
  }
  return out;
}

GapDelaySummary gap_delay_summary(const RunLog& log) {
  if (log.config_echo.empty())
    throw UnsupportedStrategy("gap_delay_summary: log has no config header");
  const RunConfig cfg = config_from_canonical(log.config_echo);
  if (!uses_gap(cfg.strategy))
    throw UnsupportedStrategy("gap_delay_summary: strategy '" + to_string(cfg.strategy) +
                              "' records no Gap");
  if (log.records.empty()) throw UnsupportedStrategy("gap_delay_summary: empty log");

  const std::int64_t spe = cfg.steps_per_epoch();
  std::map<std::int64_t, std::vector<const StepRecord*>> by_epoch;
  for (const StepRecord& r : log.records) by_epoch[(r.k - 1) / spe].push_back(&r);

  GapDelaySummary out;
  out.min_gap = log.records.front().gap_mean;
  out.min_tau = log.records.front().tau;
  std::int64_t below = 0;
  for (const auto& [epoch, recs] : by_epoch) {
    EpochGapDelay e;
    e.epoch = epoch;
    double tsum = 0.0, gsum = 0.0;
    for (const StepRecord* r : recs) {
      tsum += static_cast<double>(r->tau);
      gsum += r->gap_mean;
      out.min_gap = std::min(out.min_gap, r->gap_mean);
      out.min_tau = std::min(out.min_tau, r->tau);
    }
    const double n = static_cast<double>(recs.size());
    e.mean_tau = tsum / n;
    e.mean_gap = gsum / n;
    double tvar = 0.0, gvar = 0.0;
    for (const StepRecord* r : recs) {
      tvar += (static_cast<double>(r->tau) - e.mean_tau) * (static_cast<double>(r->tau) - e.mean_tau);
      gvar += (r->gap_mean - e.mean_gap) * (r->gap_mean - e.mean_gap);
    }
    e.std_tau = std::sqrt(tvar / n);
    e.std_gap = std::sqrt(gvar / n);
    if (e.mean_gap < e.mean_tau) ++below;
    out.epochs.push_back(e);
  }
  out.fraction_gap_below_tau =
      static_cast<double>(below) / static_cast<double>(out.epochs.size());
  return out;
}

std::string gap_delay_csv(const GapDelaySummary& s) {
  std::string out = "epoch,mean_tau,std_tau,mean_gap,std_gap\n";
  for (const EpochGapDelay& e : s.epochs) {
    out += std::to_string(e.epoch);
    out += ',' + fmt(e.mean_tau);
    out += ',' + fmt(e.std_tau);
    out += ',' + fmt(e.mean_gap);
    out += ',' + fmt(e.std_gap);
    out += '\n';
  }
  return out;
}

BoundReport bound_check(const RunLog& log, double lipschitz, double sigma, double f_star) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz))
    throw CannotCheck("bound_check: Lipschitz constant missing or non-positive");
  if (!std::isfinite(sigma) || !(sigma > 0.0))
    throw CannotCheck("bound_check: sigma must be positive (noiseless runs degenerate)");
  if (!std::isfinite(f_star)) throw CannotCheck("bound_check: f_star missing");
  if (log.config_echo.empty()) throw CannotCheck("bound_check: log has no config header");
  const RunConfig cfg = config_from_canonical(log.config_echo);
  if (!(cfg.hyper.corollary_eta > 0.0))
    throw CannotCheck("bound_check: run did not use the Corollary-1 stepsize rule");
  if (log.records.empty() || !log.records.front().loss)
    throw CannotCheck("bound_check: log does not start with a full-loss record");

  BoundReport rep;
  rep.lipschitz = lipschitz;
  rep.sigma = sigma;
  rep.f_star = f_star;
  rep.batch = cfg.batch_size;
  rep.steps = log.summary.steps;
  rep.f1 = *log.records.front().loss;
  rep.t_bound = log.summary.max_tau;

  double sum = 0.0;
  std::int64_t count = 0;
  for (const StepRecord& r : log.records)
    if (r.grad_norm2) {
      sum += *r.grad_norm2;
      ++count;
    }
  if (count == 0) throw CannotCheck("bound_check: no gradient-norm records in log");
  rep.lhs = sum / static_cast<double>(count);

  const double b = static_cast<double>(rep.batch);
  const double k = static_cast<double>(rep.steps);
  const double gap_f1 = rep.f1 - f_star;
  rep.rhs = 4.0 * std::sqrt(gap_f1 * lipschitz * sigma * sigma / (b * k));

  const double t1 = static_cast<double>(rep.t_bound) + 1.0;
  rep.k_threshold =
      static_cast<std::int64_t>(std::ceil(4.0 * b * lipschitz * t1 * t1 * gap_f1 / (sigma * sigma)));
  rep.k_precondition = rep.steps >= rep.k_threshold;

  // per-step condition B L eta_k / G_k + 2 B^2 L^2 T sum_{t=1}^{T}
  // eta_{k+t}^2 / G_{k+t}^2 <= 1 with the sum-form stepsize eta = logged / B
  std::vector<double> ratio;
  ratio.reserve(log.records.size());
  for (const StepRecord& r : log.records) ratio.push_back(r.eta / b / r.gap_mean);
  const double big_t = static_cast<double>(rep.t_bound);
  double worst = 0.0;
  std::vector<double> sq_prefix(ratio.size() + 1, 0.0);
  for (std::size_t i = 0; i < ratio.size(); ++i)
    sq_prefix[i + 1] = sq_prefix[i] + ratio[i] * ratio[i];
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    const std::size_t hi = std::min(ratio.size(), i + 1 + static_cast<std::size_t>(rep.t_bound));
    const double tail = sq_prefix[hi] - sq_prefix[i + 1];
    const double cond = b * lipschitz * ratio[i] + 2.0 * b * b * lipschitz * lipschitz * big_t * tail;
    worst = std::max(worst, cond);
  }
  rep.stepsize_condition_max = worst;
  rep.satisfied = rep.k_precondition && rep.lhs <= rep.rhs;
  return rep;
}

std::string bound_report_text(const BoundReport& r) {
  std::ostringstream out;
  out << "bound check: lhs (1/K) sum ||grad f||^2 = " << fmt(r.lhs) << "\n"
      << "             rhs 4 sqrt((f1-f*) L sigma^2 / (B K)) = " << fmt(r.rhs) << "\n"
      << "             f1 = " << fmt(r.f1) << ", f* = " << fmt(r.f_star) << ", L = "
      << fmt(r.lipschitz) << ", sigma = " << fmt(r.sigma) << ", B = " << r.batch
      << ", K = " << r.steps << "\n"
      << "             T (max observed tau) = " << r.t_bound << ", K threshold = "
      << r.k_threshold << " (precondition " << (r.k_precondition ? "met" : "NOT met") << ")\n"
      << "             stepsize condition max over k = " << fmt(r.stepsize_condition_max)
      << " (must be <= 1)\n"
      << "             satisfied = " << (r.satisfied ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace asgd
