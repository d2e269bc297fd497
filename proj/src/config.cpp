#include "asgd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "asgd/errors.hpp"
#include "asgd/rng.hpp"

namespace asgd {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'", key);
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'", key);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'", key);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid value '" + value + "' for key '" + key + "'", key);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Flat key/value view of a config file, with [section] names folded into
// prefixes for the sweep block and dropped for the others.
struct FlatConfig {
  std::map<std::string, std::string> scalar;          // plain keys
  std::map<std::string, std::vector<std::string>> sweep;  // [sweep] lists
  std::set<std::string> seen;

  void put(const std::string& section, const std::string& key, const std::string& value) {
    if (section == "sweep") {
      if (sweep.count(key)) throw ConfigError("duplicate sweep key '" + key + "'", key);
      sweep[key] = split_list(value);
      if (sweep[key].empty()) throw ConfigError("empty sweep list for '" + key + "'", key);
      return;
    }
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", key);
    scalar[key] = value;
  }
};

FlatConfig parse_flat_text(const std::string& text) {
  FlatConfig flat;
  std::stringstream stream(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> known{"run", "model", "hyper", "exec", "sweep"};
      if (!known.count(section))
        throw ConfigError("unknown section '" + section + "'", section);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
    flat.put(section, key, value);
  }
  return flat;
}

FlatConfig parse_flat_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed JSON config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("JSON config must be an object");

  FlatConfig flat;
  auto scalar_to_string = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_float()) return fmt(v.get<double>());
    throw ConfigError("unsupported JSON value type");
  };
  auto list_to_string = [&](const nlohmann::json& v) -> std::string {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += ",";
      out += scalar_to_string(item);
    }
    return out;
  };

  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> sections{"run", "model", "hyper", "exec", "sweep"};
    if (sections.count(key) && value.is_object()) {
      for (const auto& [k2, v2] : value.items())
        flat.put(key, k2, v2.is_array() ? list_to_string(v2) : scalar_to_string(v2));
    } else if (value.is_array()) {
      flat.put("", key, list_to_string(value));
    } else {
      flat.put("", key, scalar_to_string(value));
    }
  }
  return flat;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      // run
      "mode", "strategy", "gap_mode", "N", "M", "B", "steps", "epochs", "seed", "log_every",
      "sweep_mode",
      // model
      "model", "input_dim", "hidden_dim", "output_dim", "weight_decay", "noise_sigma",
      "quad_center", "quad_spread", "separation", "teacher_scale", "target_noise",
      // exec
      "exec_regime", "mu_task", "v_task", "v_mach",
      // hyper
      "eta0", "eta_max", "gamma", "nesterov", "beta1", "beta2", "epsilon", "warmup_epochs",
      "decay_factor", "decay_milestones", "c_beta", "c_epsilon", "momentum_correction",
      "corollary_eta"};
  return keys;
}

ExperimentFile resolve(const FlatConfig& flat) {
  for (const auto& [key, _] : flat.scalar)
    if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "'", key);

  auto has = [&](const std::string& k) { return flat.scalar.count(k) > 0; };
  auto get = [&](const std::string& k) { return flat.scalar.at(k); };

  ExperimentFile exp;
  RunConfig& cfg = exp.base;

  if (has("model")) cfg.model.kind = model_kind_from_string(get("model"));
  if (has("input_dim")) cfg.model.input_dim = static_cast<std::size_t>(parse_int("input_dim", get("input_dim")));
  else cfg.model.input_dim = cfg.model.kind == ModelKind::Logistic ? 8 : 4;
  if (has("hidden_dim")) cfg.model.hidden_dim = static_cast<std::size_t>(parse_int("hidden_dim", get("hidden_dim")));
  if (has("output_dim")) cfg.model.output_dim = static_cast<std::size_t>(parse_int("output_dim", get("output_dim")));
  if (has("noise_sigma")) cfg.model.noise_sigma = parse_double("noise_sigma", get("noise_sigma"));
  if (has("quad_center")) cfg.model.quad_center = parse_double("quad_center", get("quad_center"));
  if (has("quad_spread")) cfg.model.quad_spread = parse_double("quad_spread", get("quad_spread"));
  if (has("separation")) cfg.model.separation = parse_double("separation", get("separation"));
  if (has("teacher_scale")) cfg.model.teacher_scale = parse_double("teacher_scale", get("teacher_scale"));
  if (has("target_noise")) cfg.model.target_noise = parse_double("target_noise", get("target_noise"));

  if (has("strategy")) cfg.strategy = strategy_from_string(get("strategy"));
  if (has("gap_mode")) cfg.gap_mode = gap_mode_from_string(get("gap_mode"));
  if (has("mode")) cfg.mode = run_mode_from_string(get("mode"));
  if (has("N")) cfg.n_workers = parse_int("N", get("N"));
  if (has("M")) cfg.dataset_size = parse_int("M", get("M"));
  if (has("B")) cfg.batch_size = parse_int("B", get("B"));
  else cfg.batch_size = 128;
  if (has("steps")) cfg.steps = parse_int("steps", get("steps"));
  if (has("epochs")) cfg.epochs = parse_int("epochs", get("epochs"));
  if (cfg.steps == 0 && cfg.epochs == 0) cfg.epochs = 10;
  if (has("seed")) cfg.seed = parse_u64("seed", get("seed"));
  if (has("log_every")) cfg.log_every = parse_int("log_every", get("log_every"));
  if (has("sweep_mode")) cfg.sweep_mode = parse_bool("sweep_mode", get("sweep_mode"));

  Hyper& h = cfg.hyper;
  const bool adam = is_adam(cfg.strategy);
  h.eta0 = adam ? 0.00025 : 0.1;  // single-worker recipe defaults per family
  if (has("eta0")) h.eta0 = parse_double("eta0", get("eta0"));
  h.eta_max = has("eta_max") ? parse_double("eta_max", get("eta_max")) : h.eta0;
  if (has("gamma")) h.gamma = parse_double("gamma", get("gamma"));
  if (has("nesterov")) h.nesterov = parse_bool("nesterov", get("nesterov"));
  if (has("beta1")) h.beta1 = parse_double("beta1", get("beta1"));
  if (has("beta2")) h.beta2 = parse_double("beta2", get("beta2"));
  if (has("epsilon")) h.epsilon = parse_double("epsilon", get("epsilon"));
  if (has("warmup_epochs")) h.warmup_epochs = parse_double("warmup_epochs", get("warmup_epochs"));
  if (has("decay_factor")) h.decay_factor = parse_double("decay_factor", get("decay_factor"));
  if (has("decay_milestones"))
    for (const std::string& item : split_list(get("decay_milestones")))
      h.decay_milestones.push_back(parse_int("decay_milestones", item));
  if (has("c_beta")) h.c_beta = parse_double("c_beta", get("c_beta"));
  if (has("c_epsilon")) h.c_epsilon = parse_double("c_epsilon", get("c_epsilon"));
  if (has("momentum_correction"))
    h.momentum_correction = parse_bool("momentum_correction", get("momentum_correction"));
  if (has("corollary_eta")) h.corollary_eta = parse_double("corollary_eta", get("corollary_eta"));
  h.weight_decay = has("weight_decay") ? parse_double("weight_decay", get("weight_decay")) : 0.0;
  cfg.model.weight_decay = h.weight_decay;

  ExecTimeModel& ex = cfg.exec;
  if (has("exec_regime")) ex.regime = exec_regime_from_string(get("exec_regime"));
  ex.v_task = has("v_task") ? parse_double("v_task", get("v_task")) : 0.1;
  ex.v_mach = has("v_mach") ? parse_double("v_mach", get("v_mach"))
                            : (ex.regime == ExecRegime::HETEROGENEOUS ? 0.6 : 0.1);
  // mean task time defaults to B simulated time units
  ex.mu_task = has("mu_task") ? parse_double("mu_task", get("mu_task"))
                              : static_cast<double>(cfg.batch_size);

  // sweep block
  for (const auto& [key, values] : flat.sweep) {
    if (key == "eta0")
      for (const auto& v : values) exp.sweep_eta0.push_back(parse_double("sweep.eta0", v));
    else if (key == "gamma")
      for (const auto& v : values) exp.sweep_gamma.push_back(parse_double("sweep.gamma", v));
    else if (key == "N")
      for (const auto& v : values) exp.sweep_n.push_back(parse_int("sweep.N", v));
    else if (key == "strategy")
      for (const auto& v : values) exp.sweep_strategy.push_back(strategy_from_string(v));
    else if (key == "seeds")
      for (const auto& v : values) exp.sweep_seeds.push_back(parse_u64("sweep.seeds", v));
    else
      throw ConfigError("unknown sweep key '" + key + "' (eta0, gamma, N, strategy, seeds)", key);
  }
  exp.is_sweep = !flat.sweep.empty();
  if (exp.is_sweep) cfg.sweep_mode = true;

  cfg.validate();
  return exp;
}

}  // namespace

ExperimentFile parse_config_text(const std::string& text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  const bool json = i < text.size() && text[i] == '{';
  return resolve(json ? parse_flat_json(text) : parse_flat_text(text));
}

ExperimentFile parse_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("config file '" + path + "' does not exist");
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config_text(buffer.str());
}

std::vector<RunConfig> ExperimentFile::expand(std::size_t* duplicates_removed) const {
  const std::vector<double> etas = sweep_eta0.empty() ? std::vector<double>{base.hyper.eta0} : sweep_eta0;
  const std::vector<double> gammas = sweep_gamma.empty() ? std::vector<double>{base.hyper.gamma} : sweep_gamma;
  const std::vector<std::int64_t> ns = sweep_n.empty() ? std::vector<std::int64_t>{base.n_workers} : sweep_n;
  const std::vector<StrategyKind> strategies =
      sweep_strategy.empty() ? std::vector<StrategyKind>{base.strategy} : sweep_strategy;
  const std::vector<std::uint64_t> seeds =
      sweep_seeds.empty() ? std::vector<std::uint64_t>{base.seed} : sweep_seeds;

  std::vector<RunConfig> out;
  std::set<std::string> seen;
  std::size_t dups = 0;
  for (const double eta : etas)
    for (const double gamma : gammas)
      for (const std::int64_t n : ns)
        for (const StrategyKind strat : strategies)
          for (const std::uint64_t seed : seeds) {
            RunConfig cfg = base;
            cfg.hyper.eta0 = eta;
            cfg.hyper.eta_max = eta;
            cfg.hyper.gamma = gamma;
            cfg.n_workers = n;
            cfg.strategy = strat;
            cfg.seed = seed;
            cfg.validate();
            if (!seen.insert(canonical_config(cfg)).second) {
              ++dups;
              continue;
            }
            out.push_back(std::move(cfg));
          }
  if (duplicates_removed) *duplicates_removed = dups;
  return out;
}

std::string canonical_config(const RunConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["mode"] = to_string(cfg.mode);
  kv["strategy"] = to_string(cfg.strategy);
  kv["gap_mode"] = to_string(cfg.gap_mode);
  kv["N"] = std::to_string(cfg.n_workers);
  kv["M"] = std::to_string(cfg.dataset_size);
  kv["B"] = std::to_string(cfg.batch_size);
  kv["steps"] = std::to_string(cfg.steps);
  kv["epochs"] = std::to_string(cfg.epochs);
  kv["seed"] = std::to_string(cfg.seed);
  kv["log_every"] = std::to_string(cfg.log_every);
  kv["sweep_mode"] = cfg.sweep_mode ? "true" : "false";

  kv["model"] = to_string(cfg.model.kind);
  kv["input_dim"] = std::to_string(cfg.model.input_dim);
  kv["hidden_dim"] = std::to_string(cfg.model.hidden_dim);
  kv["output_dim"] = std::to_string(cfg.model.output_dim);
  kv["weight_decay"] = fmt(cfg.model.weight_decay);
  kv["noise_sigma"] = fmt(cfg.model.noise_sigma);
  kv["quad_center"] = fmt(cfg.model.quad_center);
  kv["quad_spread"] = fmt(cfg.model.quad_spread);
  kv["separation"] = fmt(cfg.model.separation);
  kv["teacher_scale"] = fmt(cfg.model.teacher_scale);
  kv["target_noise"] = fmt(cfg.model.target_noise);

  kv["exec_regime"] = to_string(cfg.exec.regime);
  kv["mu_task"] = fmt(cfg.exec.mu_task);
  kv["v_task"] = fmt(cfg.exec.v_task);
  kv["v_mach"] = fmt(cfg.exec.v_mach);

  const Hyper& h = cfg.hyper;
  kv["eta0"] = fmt(h.eta0);
  kv["eta_max"] = fmt(h.eta_max);
  kv["gamma"] = fmt(h.gamma);
  kv["nesterov"] = h.nesterov ? "true" : "false";
  kv["beta1"] = fmt(h.beta1);
  kv["beta2"] = fmt(h.beta2);
  kv["epsilon"] = fmt(h.epsilon);
  kv["warmup_epochs"] = fmt(h.warmup_epochs);
  kv["decay_factor"] = fmt(h.decay_factor);
  std::string miles;
  for (const auto m : h.decay_milestones) {
    if (!miles.empty()) miles += ",";
    miles += std::to_string(m);
  }
  kv["decay_milestones"] = miles;
  kv["c_beta"] = fmt(h.c_beta);
  kv["c_epsilon"] = fmt(h.c_epsilon);
  kv["momentum_correction"] = h.momentum_correction ? "true" : "false";
  kv["corollary_eta"] = fmt(h.corollary_eta);

  std::string out = "# asgdsim canonical config v1\n";
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string run_id(const RunConfig& cfg) {
  const std::uint64_t h = RngStream::fnv1a(canonical_config(cfg));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig config_from_canonical(const std::string& text) {
  ExperimentFile exp = parse_config_text(text);
  return exp.base;
}

std::string to_string(ExecRegime regime) {
  return regime == ExecRegime::HOMOGENEOUS ? "homogeneous" : "heterogeneous";
}

ExecRegime exec_regime_from_string(const std::string& name) {
  if (name == "homogeneous") return ExecRegime::HOMOGENEOUS;
  if (name == "heterogeneous") return ExecRegime::HETEROGENEOUS;
  throw ConfigError("unknown exec regime '" + name + "'", "exec_regime");
}

}  // namespace asgd
