#include "asgd/run_log.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "asgd/config.hpp"
#include "asgd/run_config.hpp"

namespace asgd {

namespace {
constexpr int kSchemaVersion = 1;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string RunLog::to_jsonl() const {
  std::string out;
  {
    nlohmann::json header;
    header["header"]["schema"] = kSchemaVersion;
    header["header"]["config"] = config_echo;
    out += header.dump();
    out += '\n';
  }
  for (const StepRecord& r : records) {
    nlohmann::json j;
    j["k"] = r.k;
    j["t"] = r.time;
    j["w"] = r.worker;
    j["tau"] = r.tau;
    j["tau_raw"] = r.tau_raw;
    j["gap_mean"] = r.gap_mean;
    j["gap_max"] = r.gap_max;
    j["eta"] = r.eta;
    if (r.loss) j["loss"] = *r.loss;
    if (r.grad_norm2) j["grad_norm2"] = *r.grad_norm2;
    out += j.dump();
    out += '\n';
  }
  {
    nlohmann::json j;
    auto& s = j["summary"];
    s["steps"] = summary.steps;
    s["sim_time"] = summary.sim_time;
    s["final_loss"] = summary.final_loss;
    s["final_grad_norm2"] = summary.final_grad_norm2;
    if (summary.final_accuracy)
      s["final_accuracy"] = *summary.final_accuracy;
    else
      s["final_accuracy"] = nullptr;
    s["diverged"] = summary.diverged;
    s["mean_tau"] = summary.mean_tau;
    s["mean_gap"] = summary.mean_gap;
    s["max_tau"] = summary.max_tau;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void RunLog::save_jsonl(const std::string& path) const {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  file << to_jsonl();
}

RunLog RunLog::from_jsonl_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  RunLog log;
  std::string line;
  bool have_summary = false;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    if (j.contains("header")) {
      log.config_echo = j["header"].value("config", std::string{});
      continue;
    }
    if (j.contains("summary")) {
      const auto& s = j["summary"];
      log.summary.steps = s.value("steps", std::int64_t{0});
      log.summary.sim_time = s.value("sim_time", 0.0);
      log.summary.final_loss = s.value("final_loss", 0.0);
      log.summary.final_grad_norm2 = s.value("final_grad_norm2", 0.0);
      if (s.contains("final_accuracy") && !s["final_accuracy"].is_null())
        log.summary.final_accuracy = s["final_accuracy"].get<double>();
      log.summary.diverged = s.value("diverged", false);
      log.summary.mean_tau = s.value("mean_tau", 0.0);
      log.summary.mean_gap = s.value("mean_gap", 0.0);
      log.summary.max_tau = s.value("max_tau", std::int64_t{0});
      have_summary = true;
      continue;
    }
    StepRecord r;
    r.k = j.at("k").get<std::int64_t>();
    r.time = j.at("t").get<double>();
    r.worker = j.at("w").get<std::int64_t>();
    r.tau = j.at("tau").get<std::int64_t>();
    r.tau_raw = j.at("tau_raw").get<std::int64_t>();
    r.gap_mean = j.at("gap_mean").get<double>();
    r.gap_max = j.at("gap_max").get<double>();
    r.eta = j.at("eta").get<double>();
    if (j.contains("loss")) r.loss = j["loss"].get<double>();
    if (j.contains("grad_norm2")) r.grad_norm2 = j["grad_norm2"].get<double>();
    log.records.push_back(r);
  }
  if (!have_summary) throw std::runtime_error("log file '" + path + "' has no summary line");
  return log;
}

std::string summary_csv_header() {
  return "run_id,mode,strategy,gap_mode,model,N,M,B,steps,seed,eta0,gamma,final_loss,"
         "final_grad_norm2,final_accuracy,mean_tau,mean_gap,max_tau,sim_time,diverged";
}

std::string summary_csv_row(const RunConfig& cfg, const RunSummary& s, const std::string& id) {
  std::ostringstream row;
  row << id << ',' << to_string(cfg.mode) << ',' << to_string(cfg.strategy) << ','
      << to_string(cfg.gap_mode) << ',' << to_string(cfg.model.kind) << ',' << cfg.n_workers << ','
      << cfg.dataset_size << ',' << cfg.batch_size << ',' << s.steps << ',' << cfg.seed << ','
      << fmt(cfg.hyper.eta0) << ',' << fmt(cfg.hyper.gamma) << ',' << fmt(s.final_loss) << ','
      << fmt(s.final_grad_norm2) << ',' << (s.final_accuracy ? fmt(*s.final_accuracy) : "") << ','
      << fmt(s.mean_tau) << ',' << fmt(s.mean_gap) << ',' << s.max_tau << ',' << fmt(s.sim_time)
      << ',' << (s.diverged ? "true" : "false");
  return row.str();
}

}  // namespace asgd
