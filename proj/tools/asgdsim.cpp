// asgdsim: batch CLI for the asynchronous-SGD staleness simulator.
//
// Verbs: run, sweep, speedup, check-bound, gap-summary.
// Exit codes: 0 success, 2 config error, 3 divergence, 4 IO error,
//             5 bound not satisfied.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "asgd/analysis.hpp"
#include "asgd/config.hpp"
#include "asgd/errors.hpp"
#include "asgd/simulator.hpp"

namespace fs = std::filesystem;
using namespace asgd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;
constexpr int kExitBoundFailed = 5;

std::string default_out_root() {
  if (const char* env = std::getenv("ASGDSIM_OUT")) return env;
  return ".";
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
}

struct RunOutcome {
  RunConfig cfg;
  RunSummary summary;
  std::string id;
  bool cache_hit = false;
};

// Execute one config into <root>/runs/<run-id>/, honoring existing
// identical output as a cache hit.
RunOutcome execute_run(const RunConfig& cfg, const fs::path& root) {
  RunOutcome out;
  out.cfg = cfg;
  out.id = run_id(cfg);
  const fs::path dir = root / "runs" / out.id;
  const fs::path echo_path = dir / "config.echo";
  const fs::path log_path = dir / "log.jsonl";
  const std::string echo = canonical_config(cfg);

  if (fs::exists(echo_path) && fs::exists(log_path) && read_file(echo_path) == echo) {
    const RunLog cached = RunLog::from_jsonl_file(log_path.string());
    out.summary = cached.summary;
    out.cache_hit = true;
    return out;
  }

  const RunLog log = run(cfg);
  fs::create_directories(dir);
  write_file(echo_path, echo);
  log.save_jsonl(log_path.string());
  write_file(dir / "summary.csv",
             summary_csv_header() + "\n" + summary_csv_row(cfg, log.summary, out.id) + "\n");
  out.summary = log.summary;
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_root,
            const std::string& mode_override, std::int64_t seed_override) {
  ExperimentFile exp = parse_config(config_path);
  if (exp.is_sweep) throw ConfigError("config contains a sweep block; use the sweep verb");
  RunConfig cfg = exp.base;
  if (!mode_override.empty()) cfg.mode = run_mode_from_string(mode_override);
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  if (cfg.mode == RunMode::Sequential) cfg.n_workers = 1;
  cfg.validate();

  const RunOutcome out = execute_run(cfg, out_root);
  if (out.cache_hit)
    std::cout << "cache hit: runs/" << out.id << " already holds this config\n";
  else
    std::cout << "run " << out.id << ": steps=" << out.summary.steps
              << " final_loss=" << out.summary.final_loss
              << " sim_time=" << out.summary.sim_time
              << (out.summary.diverged ? " DIVERGED" : "") << "\n";
  return out.summary.diverged ? kExitDiverged : kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_root, int parallel) {
  ExperimentFile exp = parse_config(config_path);
  std::size_t dups = 0;
  std::vector<RunConfig> configs = exp.expand(&dups);
  if (dups > 0)
    std::cerr << "warning: removed " << dups << " duplicate configs from the expansion\n";
  std::cout << "sweep: " << configs.size() << " configs\n";

  std::vector<RunOutcome> outcomes(configs.size());
  std::vector<std::string> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < configs.size(); i = next.fetch_add(1)) {
      try {
        outcomes[i] = execute_run(configs[i], out_root);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        outcomes[i].cfg = configs[i];
        outcomes[i].id = run_id(configs[i]);
      }
    }
  };
  if (parallel <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < parallel; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // merge sorted by canonical config so the CSV is reproducible
  std::vector<std::size_t> order(configs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return canonical_config(configs[a]) < canonical_config(configs[b]);
  });

  std::string csv = summary_csv_header() + ",error\n";
  for (const std::size_t i : order) {
    if (errors[i].empty()) {
      csv += summary_csv_row(outcomes[i].cfg, outcomes[i].summary, outcomes[i].id) + ",\n";
    } else {
      std::string msg = errors[i];
      std::replace(msg.begin(), msg.end(), ',', ';');
      csv += summary_csv_row(outcomes[i].cfg, RunSummary{}, outcomes[i].id) + "," + msg + "\n";
    }
  }
  fs::create_directories(out_root);
  write_file(fs::path(out_root) / "sweep.csv", csv);
  std::cout << "wrote " << (fs::path(out_root) / "sweep.csv").string() << "\n";
  return kExitOk;
}

int cmd_speedup(const std::string& regime, const std::string& ns_csv, std::int64_t repeats,
                std::int64_t iterations, std::uint64_t seed, const std::string& out_file,
                int parallel) {
  std::vector<std::int64_t> ns;
  {
    std::stringstream ss(ns_csv);
    std::string item;
    while (std::getline(ss, item, ',')) ns.push_back(std::stoll(item));
  }
  std::string csv;
  bool header = true;
  const std::vector<ExecRegime> regimes =
      regime == "both" ? std::vector<ExecRegime>{ExecRegime::HOMOGENEOUS, ExecRegime::HETEROGENEOUS}
                       : std::vector<ExecRegime>{exec_regime_from_string(regime)};
  for (const ExecRegime r : regimes) {
    const ExecTimeModel exec = r == ExecRegime::HOMOGENEOUS ? ExecTimeModel::homogeneous()
                                                            : ExecTimeModel::heterogeneous();
    const auto points = speedup_table(exec, ns, iterations, repeats, seed, parallel);
    csv += speedup_csv(r, points, header);
    header = false;
  }
  if (out_file.empty() || out_file == "-") {
    std::cout << csv;
  } else {
    write_file(out_file, csv);
    std::cout << "wrote " << out_file << "\n";
  }
  return kExitOk;
}

int cmd_check_bound(const std::string& log_path, double lipschitz, double sigma, double f_star) {
  const RunLog log = RunLog::from_jsonl_file(log_path);
  const BoundReport rep = bound_check(log, lipschitz, sigma, f_star);
  std::cout << bound_report_text(rep);
  return rep.satisfied ? kExitOk : kExitBoundFailed;
}

int cmd_gap_summary(const std::string& log_path, const std::string& out_file) {
  const RunLog log = RunLog::from_jsonl_file(log_path);
  const GapDelaySummary summary = gap_delay_summary(log);
  const std::string csv = gap_delay_csv(summary);
  if (out_file.empty() || out_file == "-") {
    std::cout << csv;
  } else {
    write_file(out_file, csv);
  }
  std::cout << "fraction of epochs with mean G < mean tau: " << summary.fraction_gap_below_tau
            << " (min G = " << summary.min_gap << ", min tau = " << summary.min_tau << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asgdsim: deterministic simulator for asynchronous-SGD staleness mitigation"};
  app.require_subcommand(1);

  std::string config_path, out_root = default_out_root(), mode_override;
  std::int64_t seed_override = -1;
  int parallel = 1;

  auto* run_cmd = app.add_subcommand("run", "execute one experiment config");
  run_cmd->add_option("--config", config_path, "experiment file")->required();
  run_cmd->add_option("--out", out_root, "output root (default $ASGDSIM_OUT or .)");
  run_cmd->add_option("--mode", mode_override, "async | ssgd | sequential");
  run_cmd->add_option("--seed", seed_override, "override the config seed");

  auto* sweep_cmd = app.add_subcommand("sweep", "expand and run a sweep config");
  sweep_cmd->add_option("--config", config_path, "experiment file with a [sweep] block")->required();
  sweep_cmd->add_option("--out", out_root, "output root");
  sweep_cmd->add_option("--parallel", parallel, "concurrent runs");

  std::string regime = "both", ns_csv = "1,2,4,8,16,32,64,128,256,512,1024", out_file;
  std::int64_t repeats = 20, iterations = 100000;
  std::uint64_t speedup_seed = 1;
  auto* spd_cmd = app.add_subcommand("speedup", "async vs sync throughput study");
  spd_cmd->add_option("--regime", regime, "homogeneous | heterogeneous | both");
  spd_cmd->add_option("--Ns", ns_csv, "comma-separated worker counts");
  spd_cmd->add_option("--repeats", repeats, "runs per point (default 20)");
  spd_cmd->add_option("--iterations", iterations, "iterations per run (default 100000)");
  spd_cmd->add_option("--seed", speedup_seed, "base seed");
  spd_cmd->add_option("--out", out_file, "CSV path ('-' for stdout)");
  spd_cmd->add_option("--parallel", parallel, "worker threads");

  std::string log_path;
  double arg_l = 0.0, arg_sigma = 0.0, arg_fstar = std::nan("");
  auto* bound_cmd = app.add_subcommand("check-bound", "convergence-bound check on a run log");
  bound_cmd->add_option("--log", log_path, "log.jsonl from a Corollary-stepsize run")->required();
  bound_cmd->add_option("--L", arg_l, "Lipschitz constant")->required();
  bound_cmd->add_option("--sigma", arg_sigma, "gradient noise bound")->required();
  bound_cmd->add_option("--fstar", arg_fstar, "optimal objective value")->required();

  auto* gap_cmd = app.add_subcommand("gap-summary", "per-epoch delay/Gap aggregation");
  gap_cmd->add_option("--log", log_path, "log.jsonl from a gap-aware run")->required();
  gap_cmd->add_option("--out", out_file, "CSV path ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, out_root, mode_override, seed_override);
    if (sweep_cmd->parsed()) return cmd_sweep(config_path, out_root, parallel);
    if (spd_cmd->parsed())
      return cmd_speedup(regime, ns_csv, repeats, iterations, speedup_seed, out_file, parallel);
    if (bound_cmd->parsed()) return cmd_check_bound(log_path, arg_l, arg_sigma, arg_fstar);
    if (gap_cmd->parsed()) return cmd_gap_summary(log_path, out_file);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what();
    if (!e.offending_key.empty()) std::cerr << " (key: " << e.offending_key << ")";
    std::cerr << "\n";
    return kExitConfig;
  } catch (const CannotCheck& e) {
    std::cerr << "cannot check: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
