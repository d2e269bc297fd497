#pragma once

#include "asgd/run_config.hpp"
#include "asgd/run_log.hpp"

namespace asgd {

// Discrete-event simulation of N asynchronous workers and one master.
// Workers pipeline one batch at a time; the master processes gradient
// arrivals in global time order (FIFO) and replies immediately. Exactly
// cfg.total_steps() master steps are executed unless divergence (non-finite
// parameters) halts the run early, in which case the log is flagged and
// still well formed.
RunLog run_async(const RunConfig& cfg);

// Synchronous baseline: each iteration all N workers draw task times, the
// iteration lasts the maximum of the draws, and one mean-gradient master
// step is applied. Used for speedup comparisons.
RunLog run_ssgd(const RunConfig& cfg);

// Single-worker loop without the event queue or execution-time model; the
// oracle the asynchronous runs are compared against. Matches run_async with
// N = 1 bit for bit on every logged quantity except simulated time.
RunLog run_sequential(const RunConfig& cfg);

RunLog run(const RunConfig& cfg);  // dispatch on cfg.mode

}  // namespace asgd
