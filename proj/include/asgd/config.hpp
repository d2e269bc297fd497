#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asgd/run_config.hpp"

namespace asgd {

// A parsed experiment file: one run, or a sweep block expanded as the
// Cartesian product of eta0 x gamma x N x strategy x seeds over a base
// config.
struct ExperimentFile {
  RunConfig base;
  bool is_sweep = false;
  std::vector<double> sweep_eta0;
  std::vector<double> sweep_gamma;
  std::vector<std::int64_t> sweep_n;
  std::vector<StrategyKind> sweep_strategy;
  std::vector<std::uint64_t> sweep_seeds;

  // Expanded configs, duplicates removed. duplicates_removed reports how
  // many were dropped.
  std::vector<RunConfig> expand(std::size_t* duplicates_removed = nullptr) const;
};

// Strict parser for the flat key=value format (sections [hyper], [model],
// [exec], [run], [sweep]) and for the equivalent JSON object. Unknown keys
// are errors naming the key; defaults follow the standard single-worker
// recipes per model kind.
ExperimentFile parse_config_text(const std::string& text);
ExperimentFile parse_config(const std::string& path);

// Canonical flat rendering of a fully resolved config; equal configs render
// to equal text. The run id is a 64-bit FNV-1a hash of this text.
std::string canonical_config(const RunConfig& cfg);
std::string run_id(const RunConfig& cfg);

// Parse a canonical (or any flat) config back into a RunConfig; used to
// recover run parameters from a log header.
RunConfig config_from_canonical(const std::string& text);

}  // namespace asgd
