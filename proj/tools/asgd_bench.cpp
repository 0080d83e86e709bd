#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "asgd/datagen.hpp"
#include "asgd/experiment.hpp"
#include "asgd/kmeans.hpp"
#include "asgd/svg.hpp"

namespace {

using namespace asgd;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0.0 : v[v.size() / 2];
}

double seconds(std::uint64_t nanos) { return static_cast<double>(nanos) * 1e-9; }

void print_summary(const ExperimentConfig& cfg, const ExperimentSummary& s) {
  std::printf("[%s] reps=%zu T=%" PRIu64 " b=%zu n=%zu epsilon=%g\n", to_string(cfg.optimizer),
              s.reps.size(), cfg.run.iterations, cfg.run.batch_size, cfg.run.workers,
              cfg.run.epsilon);
  if (s.has_gt)
    std::printf("final gt_error mean = %.17g +- %.17g\n", s.gt_mean, s.gt_stddev);
  std::printf("final objective mean = %.17g\n", s.objective_mean);
  std::printf("wall mean = %.3f s\n", seconds(s.wall_mean_nanos));
  if (!s.reps.empty() && s.reps.front().metrics.fabric) {
    FabricStats f = *s.reps.front().metrics.fabric;
    std::printf("fabric (rep 0): sent=%" PRIu64 " received=%" PRIu64 " lost_overwritten=%" PRIu64
                " good=%" PRIu64 " torn=%" PRIu64 "\n",
                f.sent, f.received, f.lost_overwritten, f.good, f.torn);
  }
  for (const auto& p : s.written) std::printf("wrote %s\n", p.string().c_str());
}

struct AsgdFlags {
  std::size_t fanout = 1;
  double partial_fraction = 1.0;
  std::size_t buffers = 0;
  bool silent = false;
  std::string aggregation = "first-worker";
  bool race_injection = false;
  double torn_probability = 0.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--fanout", fanout, "recipients per posted update");
    cmd->add_option("--partial-fraction", partial_fraction,
                    "share of prototype rows carried per message, in (0,1]");
    cmd->add_option("--buffers", buffers, "mailbox slots per worker (0 = min(n-1,8))");
    cmd->add_flag("--silent", silent, "disable communication (ablation baseline)");
    cmd->add_option("--aggregation", aggregation, "first-worker|mean-reduce")
        ->check(CLI::IsMember({"first-worker", "mean-reduce"}));
    cmd->add_flag("--race-injection", race_injection, "emulate torn messages on slot overwrites");
    cmd->add_option("--torn-probability", torn_probability,
                    "probability an overwrite tears the message (race injection)");
  }

  void apply(ExperimentConfig& cfg) const {
    cfg.fanout = fanout;
    cfg.partial_fraction = partial_fraction;
    cfg.buffers = buffers;
    cfg.silent = silent;
    cfg.aggregation = aggregation == "mean-reduce" ? FinalAggregation::MeanReduce
                                                   : FinalAggregation::FirstWorker;
    cfg.race_injection = race_injection;
    cfg.torn_probability = torn_probability;
  }
};

std::uint64_t iterations_for(OptimizerKind kind, std::uint64_t touched, std::size_t m,
                             std::size_t b, std::size_t n) {
  std::uint64_t per_iter = 1;
  switch (kind) {
    case OptimizerKind::Batch: per_iter = m; break;
    case OptimizerKind::Sgd: per_iter = 1; break;
    case OptimizerKind::MiniBatch: per_iter = b; break;
    case OptimizerKind::SimuParallel: per_iter = b * n; break;
    case OptimizerKind::Asgd: per_iter = b * n; break;
  }
  const std::uint64_t T = touched / per_iter;
  if (T == 0)
    throw ConfigError("touched-samples budget too small: fewer than one iteration for " +
                      std::string(to_string(kind)));
  return T;
}

// ---- gen-data ----------------------------------------------------------

struct GenDataCmd {
  GenSpec spec;
  std::string out;

  void run() const {
    Dataset data = generate(spec);
    data.save(out);
    const auto bytes = std::filesystem::file_size(out);
    std::printf("wrote %s: m=%zu d=%zu k=%zu (%ju bytes)\n", out.c_str(), spec.samples, spec.dim,
                spec.clusters, static_cast<uintmax_t>(bytes));
  }
};

// ---- run ----------------------------------------------------------------

struct RunCmd {
  ExperimentConfig cfg;
  AsgdFlags asgd;
  std::string optimizer_name;
  std::string out_dir_flag;

  void run() {
    const auto kind = optimizer_from_string(optimizer_name);
    if (!kind) throw ConfigError("unknown optimizer: " + optimizer_name);
    cfg.optimizer = *kind;
    asgd.apply(cfg);
    cfg.out_dir = resolve_out_dir(out_dir_flag);
    const ExperimentSummary summary = run_experiment(cfg);
    print_summary(cfg, summary);
  }
};

// ---- bench-scaling ------------------------------------------------------

struct BenchScalingCmd {
  std::string dataset;
  std::vector<std::size_t> workers{1, 2, 4, 8};
  std::uint64_t touched = 0;
  std::size_t b = 500;
  double epsilon = 0.0;
  std::size_t k = 0;
  std::vector<std::string> optimizers{"asgd", "simuparallel", "batch"};
  std::size_t reps = 3;
  std::uint64_t seed = 1;
  AsgdFlags asgd;
  std::string out_dir_flag;
  std::string name = "scaling";

  void run() const {
    const auto out_dir = resolve_out_dir(out_dir_flag);
    std::filesystem::create_directories(out_dir);
    const Dataset data = Dataset::load(dataset);

    std::string csv =
        "optimizer,workers,T,wall_nanos_median,aggregate_nanos_median,gt_error_median\n";
    std::vector<PlotSeries> series;

    for (const std::string& opt_name : optimizers) {
      const auto kind = optimizer_from_string(opt_name);
      if (!kind) throw ConfigError("unknown optimizer: " + opt_name);

      PlotSeries line{opt_name, {},  false};
      for (const std::size_t n : workers) {
        ExperimentConfig cfg;
        cfg.optimizer = *kind;
        cfg.dataset_path = dataset;
        cfg.prototypes = k;
        cfg.run.epsilon = epsilon;
        cfg.run.seed = seed;
        cfg.run.workers = n;
        cfg.run.batch_size = *kind == OptimizerKind::SimuParallel ? 1 : b;
        if (*kind == OptimizerKind::Batch || *kind == OptimizerKind::Sgd ||
            *kind == OptimizerKind::MiniBatch)
          cfg.run.workers = 1;
        cfg.run.iterations =
            iterations_for(*kind, touched, data.size(), cfg.run.batch_size, cfg.run.workers);
        asgd.apply(cfg);
        cfg.threaded = true;
        cfg.record_curves = false;
        cfg.repetitions = 1;

#ifdef _OPENMP
        // BATCH parallelism lives in the data-parallel kernels.
        if (*kind == OptimizerKind::Batch) omp_set_num_threads(static_cast<int>(n));
#endif
        std::vector<double> walls, aggs, gts;
        for (std::size_t r = 0; r < reps; ++r) {
          const SingleRun one = execute_single(data, cfg, seed + r);
          walls.push_back(static_cast<double>(one.wall_nanos));
          aggs.push_back(static_cast<double>(one.aggregate_nanos));
          gts.push_back(one.final_gt_error.value_or(0.0));
        }
#ifdef _OPENMP
        if (*kind == OptimizerKind::Batch) omp_set_num_threads(omp_get_num_procs());
#endif
        const double wall_med = median(walls);
        char row[256];
        std::snprintf(row, sizeof row, "%s,%zu,%" PRIu64 ",%.0f,%.0f,%.17g\n", opt_name.c_str(), n,
                      iterations_for(*kind, touched, data.size(),
                                     *kind == OptimizerKind::SimuParallel ? 1 : b,
                                     (*kind == OptimizerKind::Asgd ||
                                      *kind == OptimizerKind::SimuParallel)
                                         ? n
                                         : 1),
                      wall_med, median(aggs), median(gts));
        csv += row;
        line.points.emplace_back(static_cast<double>(n), seconds(static_cast<std::uint64_t>(wall_med)));
        std::printf("%-14s n=%zu wall=%.3f s (median of %zu)\n", opt_name.c_str(), n,
                    seconds(static_cast<std::uint64_t>(wall_med)), reps);
      }
      // dotted linear-scaling projection from the one-worker point
      if (!line.points.empty()) {
        PlotSeries ref{opt_name + " (linear)", {}, true};
        const double w1 = line.points.front().second * line.points.front().first;
        for (const auto& [n, _] : line.points) ref.points.emplace_back(n, w1 / n);
        series.push_back(line);
        series.push_back(ref);
      }
    }

    const auto csv_path = out_dir / (name + ".csv");
    std::ofstream(csv_path, std::ios::binary) << csv;
    const auto svg_path = out_dir / (name + ".svg");
    write_line_plot(svg_path,
                    {"Strong scaling: runtime vs workers", "workers", "wall time [s]", true, true},
                    series);
    std::printf("wrote %s\nwrote %s\n", csv_path.string().c_str(), svg_path.string().c_str());
  }
};

// ---- bench-comm ---------------------------------------------------------

struct BenchCommCmd {
  std::string dataset;
  std::vector<std::size_t> b_list{100, 500, 2000};
  std::uint64_t touched = 0;
  std::size_t n = 8;
  double epsilon = 0.0;
  std::size_t k = 0;
  std::size_t reps = 10;
  std::uint64_t seed = 1;
  AsgdFlags asgd;
  std::string out_dir_flag;
  std::string name = "comm";

  void run() const {
    const auto out_dir = resolve_out_dir(out_dir_flag);
    std::filesystem::create_directories(out_dir);
    const Dataset data = Dataset::load(dataset);

    std::string csv =
        "b,T,asgd_wall_nanos_median,silent_wall_nanos_median,overhead_pct,gt_error_median,"
        "silent_gt_error_median,sent,received,lost_overwritten,good,torn\n";
    std::vector<PlotSeries> series;

    for (const std::size_t b : b_list) {
      ExperimentConfig cfg;
      cfg.optimizer = OptimizerKind::Asgd;
      cfg.dataset_path = dataset;
      cfg.prototypes = k;
      cfg.run.epsilon = epsilon;
      cfg.run.batch_size = b;
      cfg.run.workers = n;
      cfg.run.iterations = iterations_for(OptimizerKind::Asgd, touched, data.size(), b, n);
      asgd.apply(cfg);
      cfg.threaded = true;
      cfg.repetitions = 1;

      std::vector<double> walls, gts, silent_walls, silent_gts;
      std::optional<FabricStats> stats;
      PlotSeries curve{"asgd b=" + std::to_string(b), {}, false};
      PlotSeries silent_curve{"silent b=" + std::to_string(b), {}, true};
      for (std::size_t r = 0; r < reps; ++r) {
        ExperimentConfig comm_cfg = cfg;
        const SingleRun one = execute_single(data, comm_cfg, seed + r);
        walls.push_back(static_cast<double>(one.wall_nanos));
        gts.push_back(one.final_gt_error.value_or(0.0));
        if (!stats) stats = one.metrics.fabric;
        if (r == 0)
          for (const MetricPoint& p : one.metrics.points())
            if (p.gt_error)
              curve.points.emplace_back(static_cast<double>(p.touched_samples), *p.gt_error);

        ExperimentConfig silent_cfg = cfg;
        silent_cfg.silent = true;
        const SingleRun two = execute_single(data, silent_cfg, seed + r);
        silent_walls.push_back(static_cast<double>(two.wall_nanos));
        silent_gts.push_back(two.final_gt_error.value_or(0.0));
        if (r == 0)
          for (const MetricPoint& p : two.metrics.points())
            if (p.gt_error)
              silent_curve.points.emplace_back(static_cast<double>(p.touched_samples), *p.gt_error);
      }
      const double wall_med = median(walls), silent_med = median(silent_walls);
      const double overhead = silent_med > 0 ? (wall_med / silent_med - 1.0) * 100.0 : 0.0;
      const FabricStats f = stats.value_or(FabricStats{});
      char row[320];
      std::snprintf(row, sizeof row,
                    "%zu,%" PRIu64 ",%.0f,%.0f,%.2f,%.17g,%.17g,%" PRIu64 ",%" PRIu64 ",%" PRIu64
                    ",%" PRIu64 ",%" PRIu64 "\n",
                    b, cfg.run.iterations, wall_med, silent_med, overhead, median(gts),
                    median(silent_gts), f.sent, f.received, f.lost_overwritten, f.good, f.torn);
      csv += row;
      series.push_back(std::move(curve));
      series.push_back(std::move(silent_curve));
      std::printf("b=%zu overhead=%.2f%% gt=%.6g silent_gt=%.6g\n", b, overhead, median(gts),
                  median(silent_gts));
    }

    const auto csv_path = out_dir / (name + ".csv");
    std::ofstream(csv_path, std::ios::binary) << csv;
    const auto svg_path = out_dir / (name + ".svg");
    write_line_plot(svg_path,
                    {"Communication frequency: convergence", "touched samples", "ground-truth error",
                     false, true},
                    series);
    std::printf("wrote %s\nwrote %s\n", csv_path.string().c_str(), svg_path.string().c_str());
  }
};

// ---- compare-aggregation -------------------------------------------------

struct CompareAggCmd {
  std::string dataset;
  std::vector<std::size_t> workers{1, 2, 4, 8};
  std::uint64_t touched = 0;
  std::size_t b = 500;
  double epsilon = 0.0;
  std::size_t k = 0;
  std::size_t reps = 10;
  std::uint64_t seed = 1;
  AsgdFlags asgd;
  std::string out_dir_flag;
  std::string name = "aggregation";

  void run() const {
    const auto out_dir = resolve_out_dir(out_dir_flag);
    std::filesystem::create_directories(out_dir);
    const Dataset data = Dataset::load(dataset);

    std::string csv =
        "workers,mode,wall_nanos_median,aggregate_nanos_median,gt_error_median\n";
    PlotSeries first_wall{"first-worker", {}, false}, mean_wall{"mean-reduce", {}, false};
    PlotSeries first_err{"first-worker", {}, false}, mean_err{"mean-reduce", {}, false};

    for (const std::size_t n : workers) {
      for (const bool mean_reduce : {false, true}) {
        ExperimentConfig cfg;
        cfg.optimizer = OptimizerKind::Asgd;
        cfg.dataset_path = dataset;
        cfg.prototypes = k;
        cfg.run.epsilon = epsilon;
        cfg.run.batch_size = b;
        cfg.run.workers = n;
        cfg.run.iterations = iterations_for(OptimizerKind::Asgd, touched, data.size(), b, n);
        asgd.apply(cfg);
        cfg.aggregation =
            mean_reduce ? FinalAggregation::MeanReduce : FinalAggregation::FirstWorker;
        cfg.threaded = true;
        cfg.record_curves = false;
        cfg.repetitions = 1;

        std::vector<double> walls, aggs, gts;
        for (std::size_t r = 0; r < reps; ++r) {
          const SingleRun one = execute_single(data, cfg, seed + r);
          walls.push_back(static_cast<double>(one.wall_nanos));
          aggs.push_back(static_cast<double>(one.aggregate_nanos));
          gts.push_back(one.final_gt_error.value_or(0.0));
        }
        const char* mode = mean_reduce ? "mean-reduce" : "first-worker";
        char row[192];
        std::snprintf(row, sizeof row, "%zu,%s,%.0f,%.0f,%.17g\n", n, mode, median(walls),
                      median(aggs), median(gts));
        csv += row;
        auto& wall_series = mean_reduce ? mean_wall : first_wall;
        auto& err_series = mean_reduce ? mean_err : first_err;
        wall_series.points.emplace_back(static_cast<double>(n),
                                        seconds(static_cast<std::uint64_t>(median(walls))));
        err_series.points.emplace_back(static_cast<double>(n), median(gts));
        std::printf("n=%zu %-13s wall=%.3f s gt=%.6g (agg %.1f us)\n", n, mode,
                    seconds(static_cast<std::uint64_t>(median(walls))), median(gts),
                    median(aggs) / 1000.0);
      }
    }

    const auto csv_path = out_dir / (name + ".csv");
    std::ofstream(csv_path, std::ios::binary) << csv;
    const PlotSeries wall_series[] = {first_wall, mean_wall};
    const PlotSeries err_series[] = {first_err, mean_err};
    const auto wall_svg = out_dir / (name + "_runtime.svg");
    const auto err_svg = out_dir / (name + "_error.svg");
    write_line_plot(wall_svg, {"Final aggregation: runtime", "workers", "wall time [s]", true, true},
                    wall_series);
    write_line_plot(err_svg,
                    {"Final aggregation: error", "workers", "ground-truth error", true, false},
                    err_series);
    std::printf("wrote %s\nwrote %s\nwrote %s\n", csv_path.string().c_str(),
                wall_svg.string().c_str(), err_svg.string().c_str());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ASGD / K-Means benchmark suite"};
  app.require_subcommand(1);

  GenDataCmd gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic clustered dataset");
  gen_cmd->add_option("--m", gen.spec.samples, "sample count")->required();
  gen_cmd->add_option("--d", gen.spec.dim, "dimension")->required();
  gen_cmd->add_option("--k", gen.spec.clusters, "cluster count")->required();
  gen_cmd->add_option("--min-center-distance", gen.spec.min_center_distance,
                      "pairwise center distance lower bound");
  gen_cmd->add_option("--cluster-stddev", gen.spec.cluster_stddev, "per-cluster Gaussian stddev");
  gen_cmd->add_option("--center-box", gen.spec.center_box,
                      "side of the center sampling cube (0 = 10*min-center-distance)");
  gen_cmd->add_option("--seed", gen.spec.seed, "generator seed");
  gen_cmd->add_option("--out", gen.out, "output dataset path")->required();

  RunCmd run;
  auto* run_cmd = app.add_subcommand("run", "run one optimizer with repetitions");
  run_cmd->set_config("--config", "", "flat key = value config file; flags override");
  run_cmd->add_option("--dataset", run.cfg.dataset_path, "dataset file")->required();
  run_cmd->add_option("--optimizer", run.optimizer_name, "batch|sgd|simuparallel|minibatch|asgd")
      ->required();
  run_cmd->add_option("--T", run.cfg.run.iterations, "iterations")->required();
  run_cmd->add_option("--epsilon", run.cfg.run.epsilon, "step size")->required();
  run_cmd->add_option("--b", run.cfg.run.batch_size, "mini-batch size");
  run_cmd->add_option("--n", run.cfg.run.workers, "worker count");
  run_cmd->add_option("--k", run.cfg.prototypes, "prototypes (0 = from ground truth)");
  run_cmd->add_option("--seed", run.cfg.run.seed, "base seed; repetition r uses seed+r");
  run_cmd->add_option("--repetitions", run.cfg.repetitions, "repetitions");
  run_cmd->add_flag("--threaded", run.cfg.threaded,
                    "one thread per worker (default: deterministic scheduler)");
  run_cmd->add_option("--out-dir", run.out_dir_flag, "output directory (default $ASGD_OUT_DIR or ./out)");
  run_cmd->add_option("--name", run.cfg.name, "output file stem");
  run.asgd.add_to(run_cmd);

  BenchScalingCmd scaling;
  auto* scaling_cmd = app.add_subcommand("bench-scaling", "strong-scaling sweep over worker counts");
  scaling_cmd->add_option("--dataset", scaling.dataset, "dataset file")->required();
  scaling_cmd->add_option("--workers", scaling.workers, "worker counts")->delimiter(',');
  scaling_cmd->add_option("--touched", scaling.touched, "total touched-samples budget")->required();
  scaling_cmd->add_option("--b", scaling.b, "asgd mini-batch size");
  scaling_cmd->add_option("--epsilon", scaling.epsilon, "step size")->required();
  scaling_cmd->add_option("--k", scaling.k, "prototypes (0 = from ground truth)");
  scaling_cmd->add_option("--optimizers", scaling.optimizers, "optimizers to sweep")->delimiter(',');
  scaling_cmd->add_option("--reps", scaling.reps, "timing repetitions (median)");
  scaling_cmd->add_option("--seed", scaling.seed, "base seed");
  scaling_cmd->add_option("--out-dir", scaling.out_dir_flag, "output directory");
  scaling_cmd->add_option("--name", scaling.name, "output file stem");
  scaling.asgd.add_to(scaling_cmd);

  BenchCommCmd comm;
  auto* comm_cmd = app.add_subcommand("bench-comm", "communication-frequency sweep over b");
  comm_cmd->add_option("--dataset", comm.dataset, "dataset file")->required();
  comm_cmd->add_option("--b-list", comm.b_list, "mini-batch sizes")->delimiter(',');
  comm_cmd->add_option("--touched", comm.touched, "total touched-samples budget")->required();
  comm_cmd->add_option("--n", comm.n, "worker count");
  comm_cmd->add_option("--epsilon", comm.epsilon, "step size")->required();
  comm_cmd->add_option("--k", comm.k, "prototypes (0 = from ground truth)");
  comm_cmd->add_option("--reps", comm.reps, "repetitions");
  comm_cmd->add_option("--seed", comm.seed, "base seed");
  comm_cmd->add_option("--out-dir", comm.out_dir_flag, "output directory");
  comm_cmd->add_option("--name", comm.name, "output file stem");
  comm.asgd.add_to(comm_cmd);

  CompareAggCmd agg;
  auto* agg_cmd =
      app.add_subcommand("compare-aggregation", "first-worker vs mean-reduce final aggregation");
  agg_cmd->add_option("--dataset", agg.dataset, "dataset file")->required();
  agg_cmd->add_option("--workers", agg.workers, "worker counts")->delimiter(',');
  agg_cmd->add_option("--touched", agg.touched, "total touched-samples budget")->required();
  agg_cmd->add_option("--b", agg.b, "mini-batch size");
  agg_cmd->add_option("--epsilon", agg.epsilon, "step size")->required();
  agg_cmd->add_option("--k", agg.k, "prototypes (0 = from ground truth)");
  agg_cmd->add_option("--reps", agg.reps, "repetitions");
  agg_cmd->add_option("--seed", agg.seed, "base seed");
  agg_cmd->add_option("--out-dir", agg.out_dir_flag, "output directory");
  agg_cmd->add_option("--name", agg.name, "output file stem");
  agg.asgd.add_to(agg_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen_cmd->parsed()) gen.run();
    if (run_cmd->parsed()) run.run();
    if (scaling_cmd->parsed()) scaling.run();
    if (comm_cmd->parsed()) comm.run();
    if (agg_cmd->parsed()) agg.run();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
