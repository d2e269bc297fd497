#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace asgd {

struct RunConfig;

// One record per master step. loss / grad_norm2 are present on logging
// steps only (full-dataset evaluations).
struct StepRecord {
  std::int64_t k = 0;
  double time = 0.0;
  std::int64_t worker = 0;
  std::int64_t tau = 1;
  std::int64_t tau_raw = 1;
  double gap_mean = 1.0;
  double gap_max = 1.0;
  double eta = 0.0;
  std::optional<double> loss;
  std::optional<double> grad_norm2;
};

struct RunSummary {
  std::int64_t steps = 0;
  double sim_time = 0.0;
  double final_loss = 0.0;
  double final_grad_norm2 = 0.0;
  std::optional<double> final_accuracy;
  bool diverged = false;
  double mean_tau = 0.0;
  double mean_gap = 0.0;
  std::int64_t max_tau = 0;
};

struct RunLog {
  std::string config_echo;  // canonical flat config, embedded in the header line
  std::vector<StepRecord> records;
  RunSummary summary;

  // JSON-lines: a header object, one object per record, a summary object.
  std::string to_jsonl() const;
  static RunLog from_jsonl_file(const std::string& path);
  void save_jsonl(const std::string& path) const;
};

std::string summary_csv_header();
std::string summary_csv_row(const RunConfig& cfg, const RunSummary& s, const std::string& run_id);

}  // namespace asgd
