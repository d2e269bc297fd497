#pragma once

#include <cstdint>
#include <string>

#include "asgd/exec_time.hpp"
#include "asgd/hyper.hpp"
#include "asgd/models.hpp"
#include "asgd/strategies.hpp"

namespace asgd {

enum class RunMode { Async, Ssgd, Sequential };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

// A full experiment description. Deterministic: (config, seed) fixes the
// dataset, the initialization, every batch, every execution time, and hence
// the entire RunLog byte for byte.
struct RunConfig {
  std::int64_t n_workers = 1;
  StrategyKind strategy = StrategyKind::NAG_ASGD;
  GapMode gap_mode = GapMode::PARAMWISE;
  Hyper hyper;
  ModelSpec model;
  std::int64_t dataset_size = 4096;
  std::int64_t batch_size = 128;
  std::int64_t steps = 0;    // total master steps; 0 means use epochs
  std::int64_t epochs = 0;
  ExecTimeModel exec;
  std::uint64_t seed = 1;
  std::int64_t log_every = 0;  // full loss/grad cadence; 0 means once per epoch
  RunMode mode = RunMode::Async;
  bool sweep_mode = false;     // permits negative momentum

  std::int64_t steps_per_epoch() const {
    return (dataset_size + batch_size - 1) / batch_size;
  }

  std::int64_t total_steps() const {
    if (steps > 0) return steps;
    return epochs * steps_per_epoch();
  }

  std::int64_t log_stride() const {
    return log_every > 0 ? log_every : steps_per_epoch();
  }

  void validate() const {
    if (n_workers < 1) throw ConfigError("N must be >= 1", "N");
    if (dataset_size < 1) throw ConfigError("M must be >= 1", "M");
    if (batch_size < 1 || batch_size > dataset_size)
      throw ConfigError("B must satisfy 1 <= B <= M", "B");
    if (steps <= 0 && epochs <= 0)
      throw ConfigError("either steps or epochs must be positive", "steps");
    if (steps > 0 && epochs > 0)
      throw ConfigError("give steps or epochs, not both", "steps");
    hyper.validate(sweep_mode);
    model.validate();
    exec.validate();
  }
};

}  // namespace asgd
