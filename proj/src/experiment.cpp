#include "asgd/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "asgd/datagen.hpp"
#include "asgd/kmeans.hpp"
#include "asgd/rng.hpp"

namespace asgd {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write: " + path.string());
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string config_echo(const ExperimentConfig& cfg) {
  std::string s;
  s += "optimizer=" + std::string(to_string(cfg.optimizer));
  s += " T=" + std::to_string(cfg.run.iterations);
  s += " epsilon=" + std::to_string(cfg.run.epsilon);
  s += " b=" + std::to_string(cfg.run.batch_size);
  s += " n=" + std::to_string(cfg.run.workers);
  if (cfg.optimizer == OptimizerKind::Asgd) {
    s += " fanout=" + std::to_string(cfg.fanout);
    s += " partial_fraction=" + std::to_string(cfg.partial_fraction);
    s += " buffers=" + std::to_string(cfg.buffers);
    s += cfg.silent ? " silent=1" : " silent=0";
    s += cfg.aggregation == FinalAggregation::MeanReduce ? " aggregation=mean-reduce"
                                                         : " aggregation=first-worker";
  }
  return s;
}

}  // namespace

const char* to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Batch: return "batch";
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::SimuParallel: return "simuparallel";
    case OptimizerKind::MiniBatch: return "minibatch";
    case OptimizerKind::Asgd: return "asgd";
  }
  return "?";
}

std::optional<OptimizerKind> optimizer_from_string(const std::string& name) {
  if (name == "batch") return OptimizerKind::Batch;
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "simuparallel") return OptimizerKind::SimuParallel;
  if (name == "minibatch") return OptimizerKind::MiniBatch;
  if (name == "asgd") return OptimizerKind::Asgd;
  return std::nullopt;
}

AsgdConfig ExperimentConfig::asgd() const {
  AsgdConfig c;
  c.run = run;
  c.fanout = fanout;
  c.partial_fraction = partial_fraction;
  c.buffers = buffers;
  c.silent = silent;
  c.aggregation = aggregation;
  c.threaded = threaded;
  c.race_injection = race_injection;
  c.torn_probability = torn_probability;
  return c;
}

ModelState init_prototypes(const Dataset& data, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("init: k must be >= 1");
  if (k > data.size()) throw ConfigError("init: k exceeds the dataset size");
  RandomStream rng = seeded_rng(seed, kStreamInit);
  const auto picks = pick_distinct(data.size(), k, rng);
  Mat w(k, data.dim());
  const Samples X = data.samples();
  for (std::size_t i = 0; i < k; ++i) {
    const auto row = X.row(picks[i]);
    std::copy(row.begin(), row.end(), w.row(i));
  }
  return ModelState(std::move(w));
}

SingleRun execute_single(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::size_t k =
      cfg.prototypes ? cfg.prototypes : (data.ground_truth() ? data.ground_truth()->rows : 0);
  if (k == 0) throw ConfigError("k not given and the dataset carries no ground truth");

  RunConfig run = cfg.run;
  run.seed = seed;
  const ModelState w0 = init_prototypes(data, k, seed);
  const KMeansObjective objective;

  const bool batch_like = cfg.optimizer == OptimizerKind::Batch;
  RunRecorder recorder(batch_like ? 1 : metric_cadence(run.iterations));

  SingleRun out{w0, RunMetrics{}, 0, 0, 0.0, std::nullopt};
  std::uint64_t final_touched = 0;

  switch (cfg.optimizer) {
    case OptimizerKind::Batch:
      out.model = batch_optimize(objective, data, run, w0, &recorder);
      final_touched = run.iterations * data.size();
      out.wall_nanos = recorder.elapsed_nanos();
      break;
    case OptimizerKind::Sgd:
      out.model = sgd_optimize(objective, data, run, w0, &recorder);
      final_touched = run.iterations;
      out.wall_nanos = recorder.elapsed_nanos();
      break;
    case OptimizerKind::MiniBatch:
      out.model = minibatch_sgd_optimize(objective, data, run, w0, &recorder);
      final_touched = run.iterations * run.batch_size;
      out.wall_nanos = recorder.elapsed_nanos();
      break;
    case OptimizerKind::SimuParallel: {
      SimuResult r = simuparallel_sgd(objective, data, run, w0, &recorder, cfg.threaded);
      out.model = std::move(r.model);
      out.wall_nanos = r.wall_nanos;
      out.aggregate_nanos = r.aggregate_nanos;
      final_touched = run.iterations * run.batch_size * run.workers;
      break;
    }
    case OptimizerKind::Asgd: {
      AsgdConfig acfg = cfg.asgd();
      acfg.run.seed = seed;
      AsgdResult r = asgd_optimize(objective, data, acfg, w0, &recorder);
      out.model = std::move(r.model);
      out.wall_nanos = r.wall_nanos;
      out.aggregate_nanos = r.aggregate_nanos;
      out.metrics.fabric = r.fabric;
      final_touched = run.iterations * run.batch_size * run.workers;
      break;
    }
  }

  out.metrics.optimizer = to_string(cfg.optimizer);
  out.metrics.config_echo = config_echo(cfg);
  out.metrics.seed = seed;

  const Samples X = data.samples();
  const auto& truth = data.ground_truth();
  auto evaluate = [&](const Mat& state, std::uint64_t touched, std::uint64_t wall) {
    MetricPoint p;
    p.touched_samples = touched;
    p.wall_nanos = wall;
    p.objective = objective.loss(state, X);
    if (truth) p.gt_error = ground_truth_error(state, *truth);
    out.metrics.record(p);
  };
  if (cfg.record_curves)
    for (const StateSnapshot& snap : recorder.take())
      evaluate(snap.state, snap.touched, snap.wall_nanos);
  if (run.iterations > 0) evaluate(out.model.w(), final_touched, out.wall_nanos);

  if (!out.metrics.points().empty()) {
    out.final_objective = out.metrics.points().back().objective;
    out.final_gt_error = out.metrics.points().back().gt_error;
  }
  return out;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  if (cfg.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  const Dataset data = Dataset::load(cfg.dataset_path);

  std::filesystem::create_directories(cfg.out_dir);
  const std::string stem = cfg.name.empty() ? to_string(cfg.optimizer) : cfg.name;

  ExperimentSummary summary;
  std::vector<RunMetrics> all_metrics;
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    SingleRun run = execute_single(data, cfg, cfg.run.seed + rep);
    const auto path = cfg.out_dir / (stem + "_rep" + std::to_string(rep) + ".csv");
    write_file(path, run.metrics.to_csv());
    summary.written.push_back(path);
    all_metrics.push_back(run.metrics);
    summary.reps.push_back(std::move(run));
  }

  const auto agg = aggregate_runs(all_metrics);
  const auto agg_path = cfg.out_dir / (stem + "_agg.csv");
  write_file(agg_path, aggregate_csv(agg));
  summary.written.push_back(agg_path);

  const double n = static_cast<double>(summary.reps.size());
  double wall = 0.0;
  summary.has_gt = true;
  for (const SingleRun& r : summary.reps) {
    summary.objective_mean += r.final_objective / n;
    wall += static_cast<double>(r.wall_nanos) / n;
    summary.has_gt &= r.final_gt_error.has_value();
  }
  summary.wall_mean_nanos = static_cast<std::uint64_t>(wall);
  if (summary.has_gt) {
    for (const SingleRun& r : summary.reps) summary.gt_mean += *r.final_gt_error / n;
    if (summary.reps.size() > 1) {
      double v = 0.0;
      for (const SingleRun& r : summary.reps) {
        const double d = *r.final_gt_error - summary.gt_mean;
        v += d * d;
      }
      summary.gt_stddev = std::sqrt(v / (n - 1.0));
    }
  }
  return summary;
}

std::filesystem::path resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("ASGD_OUT_DIR"); env && *env) return env;
  return "out";
}

}  // namespace asgd
