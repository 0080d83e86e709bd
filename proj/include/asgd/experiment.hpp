#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asgd/async_sgd.hpp"
#include "asgd/dataset.hpp"
#include "asgd/metrics.hpp"
#include "asgd/optimizers.hpp"

namespace asgd {

enum class OptimizerKind { Batch, Sgd, SimuParallel, MiniBatch, Asgd };

const char* to_string(OptimizerKind kind);
std::optional<OptimizerKind> optimizer_from_string(const std::string& name);

/// Invalid experiment setup (maps to exit code 2 in the CLI, as opposed to
/// runtime failures which exit 1).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  OptimizerKind optimizer = OptimizerKind::Asgd;
  std::filesystem::path dataset_path;
  std::size_t prototypes = 0;  // learned k; 0 = take it from the ground truth
  RunConfig run{};
  std::size_t fanout = 1;
  double partial_fraction = 1.0;
  std::size_t buffers = 0;
  bool silent = false;
  FinalAggregation aggregation = FinalAggregation::FirstWorker;
  bool threaded = false;
  bool race_injection = false;
  double torn_probability = 0.0;
  std::size_t repetitions = 10;
  std::filesystem::path out_dir = "out";
  std::string name;       // output file stem; empty = optimizer name
  bool record_curves = true;  // false: only the final point (benchmark sweeps)

  AsgdConfig asgd() const;
};

/// Prototypes initialized from k distinct samples drawn uniformly from the
/// dataset. Every optimizer shares this initializer for a given seed.
ModelState init_prototypes(const Dataset& data, std::size_t k, std::uint64_t seed);

struct SingleRun {
  ModelState model;
  RunMetrics metrics;
  std::uint64_t wall_nanos = 0;
  std::uint64_t aggregate_nanos = 0;
  double final_objective = 0.0;
  std::optional<double> final_gt_error;
};

/// One repetition at an explicit seed: optimize with snapshots, then evaluate
/// objective (and ground-truth error when available) for every snapshot
/// outside the timed section.
SingleRun execute_single(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed);

struct ExperimentSummary {
  std::vector<SingleRun> reps;
  double gt_mean = 0.0, gt_stddev = 0.0;
  double objective_mean = 0.0;
  std::uint64_t wall_mean_nanos = 0;
  bool has_gt = false;
  std::vector<std::filesystem::path> written;
};

/// Runs cfg.repetitions repetitions with seeds seed, seed+1, ... and writes
/// per-repetition CSVs plus the mean/variance aggregate CSV under out_dir.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

/// Resolves the output directory: explicit flag > ASGD_OUT_DIR env > "out".
std::filesystem::path resolve_out_dir(const std::string& flag_value);

}  // namespace asgd
