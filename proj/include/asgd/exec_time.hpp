#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asgd/errors.hpp"
#include "asgd/rng.hpp"

namespace asgd {

enum class ExecRegime { HOMOGENEOUS, HETEROGENEOUS };

std::string to_string(ExecRegime regime);
ExecRegime exec_regime_from_string(const std::string& name);

// Gamma-distributed task execution times (the CVB model).
//
// HOMOGENEOUS: every machine has the same mean mu_task; each task draws
//   Gamma(alpha_mach, mu_task / alpha_mach), alpha_mach = 1 / V_mach^2.
//   With V_mach = 0.1 and mean 128 this puts about 1% of tasks above 160.
// HETEROGENEOUS: machine j first draws its mean p[j] from
//   Gamma(alpha_mach, mu_task / alpha_mach) once per run; each of its tasks
//   then draws Gamma(alpha_task, p[j] / alpha_task), alpha_task = 1/V_task^2.
//   With V_mach = 0.6 about 27.9% of machine means exceed 160, producing
//   persistent stragglers.
struct ExecTimeModel {
  ExecRegime regime = ExecRegime::HOMOGENEOUS;
  double mu_task = 128.0;
  double v_task = 0.1;
  double v_mach = 0.1;  // 0.1 homogeneous, 0.6 heterogeneous

  std::vector<double> machine_mean;  // filled by init_machines

  static ExecTimeModel homogeneous(double mu = 128.0) {
    ExecTimeModel m;
    m.regime = ExecRegime::HOMOGENEOUS;
    m.mu_task = mu;
    m.v_task = 0.1;
    m.v_mach = 0.1;
    return m;
  }

  static ExecTimeModel heterogeneous(double mu = 128.0) {
    ExecTimeModel m;
    m.regime = ExecRegime::HETEROGENEOUS;
    m.mu_task = mu;
    m.v_task = 0.1;
    m.v_mach = 0.6;
    return m;
  }

  void validate() const {
    if (!(mu_task > 0.0)) throw ConfigError("mu_task must be positive", "mu_task");
    if (!(v_task > 0.0)) throw ConfigError("v_task must be positive", "v_task");
    if (!(v_mach > 0.0)) throw ConfigError("v_mach must be positive", "v_mach");
  }

  double alpha_task() const { return 1.0 / (v_task * v_task); }
  double alpha_mach() const { return 1.0 / (v_mach * v_mach); }

  // Draw per-machine means. Heterogeneous machines each get their own mean
  // from the machine-level gamma; homogeneous machines share mu_task.
  void init_machines(std::int64_t n_machines, RngStream& rng) {
    validate();
    machine_mean.assign(static_cast<std::size_t>(n_machines), mu_task);
    if (regime == ExecRegime::HETEROGENEOUS) {
      const double a = alpha_mach();
      for (double& m : machine_mean) m = rng.gamma(a, mu_task / a);
    }
  }

  double sample_task_time(std::int64_t machine_id, RngStream& rng) const {
    const auto j = static_cast<std::size_t>(machine_id);
    if (j >= machine_mean.size())
      throw ConfigError("sample_task_time: machine not initialized");
    if (regime == ExecRegime::HOMOGENEOUS) {
      const double a = alpha_mach();
      return rng.gamma(a, machine_mean[j] / a);
    }
    const double a = alpha_task();
    return rng.gamma(a, machine_mean[j] / a);
  }
};

}  // namespace asgd
