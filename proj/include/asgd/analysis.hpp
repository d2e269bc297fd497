#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asgd/exec_time.hpp"
#include "asgd/run_log.hpp"

namespace asgd {

// Timing-only throughput comparison between asynchronous and synchronous
// serving. Throughputs count batch completions per simulated time unit;
// speedups are normalized to the N = 1 asynchronous throughput measured
// with the same repeat seeds.
struct SpeedupPoint {
  std::int64_t n_workers = 1;
  double async_throughput = 0.0;
  double sync_throughput = 0.0;
  double async_speedup = 1.0;
  double sync_speedup = 1.0;
  double async_over_sync = 1.0;
};

std::vector<SpeedupPoint> speedup_table(const ExecTimeModel& exec,
                                        const std::vector<std::int64_t>& ns,
                                        std::int64_t iterations, std::int64_t repeats,
                                        std::uint64_t seed, int threads = 1);

std::string speedup_csv(ExecRegime regime, const std::vector<SpeedupPoint>& points,
                        bool with_header = true);

// Per-epoch delay and Gap aggregation of a gap-aware RunLog.
struct EpochGapDelay {
  std::int64_t epoch = 0;
  double mean_tau = 0.0;
  double std_tau = 0.0;
  double mean_gap = 0.0;
  double std_gap = 0.0;
};

struct GapDelaySummary {
  std::vector<EpochGapDelay> epochs;
  double fraction_gap_below_tau = 0.0;  // epochs with mean G < mean tau
  double min_gap = 0.0;
  std::int64_t min_tau = 0;
};

GapDelaySummary gap_delay_summary(const RunLog& log);
std::string gap_delay_csv(const GapDelaySummary& summary);

// Numeric check of the ergodic convergence bound and of the per-step
// stepsize condition, on a log produced with the Corollary-1 stepsize rule.
struct BoundReport {
  double lhs = 0.0;            // (1/K) sum ||grad f(theta_k)||^2 over logged steps
  double rhs = 0.0;            // 4 sqrt((f1 - f*) L sigma^2 / (B K))
  double f1 = 0.0;
  double lipschitz = 0.0;
  double sigma = 0.0;
  double f_star = 0.0;
  std::int64_t batch = 0;
  std::int64_t steps = 0;
  std::int64_t t_bound = 0;    // max observed tau
  std::int64_t k_threshold = 0;  // required minimum K
  bool k_precondition = false;
  double stepsize_condition_max = 0.0;  // max over k of the per-step condition
  bool satisfied = false;
};

BoundReport bound_check(const RunLog& log, double lipschitz, double sigma, double f_star);
std::string bound_report_text(const BoundReport& report);

}  // namespace asgd
