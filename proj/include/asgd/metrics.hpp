#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asgd/fabric.hpp"
#include "asgd/mat.hpp"

namespace asgd {

/// One instrumentation point. touched_samples follows the global accounting
/// I (summed over all workers); gt_error is present only when the dataset
/// carries ground truth.
struct MetricPoint {
  std::uint64_t touched_samples = 0;
  std::uint64_t wall_nanos = 0;
  double objective = 0.0;
  std::optional<double> gt_error;
};

/// Time series of one optimization run plus identifying metadata.
class RunMetrics {
 public:
  std::string optimizer;
  std::string config_echo;
  std::uint64_t seed = 0;
  std::optional<FabricStats> fabric;

  /// Appends a point. touched_samples must increase strictly and wall_nanos
  /// must not decrease; violations throw.
  void record(MetricPoint p);

  const std::vector<MetricPoint>& points() const { return points_; }

  /// Header `touched_samples,wall_nanos,objective,gt_error`, then one row per
  /// point. Reals use 17 significant digits so parsing back is bit-exact;
  /// absent gt_error renders as an empty field.
  std::string to_csv() const;

  static std::vector<MetricPoint> parse_csv(const std::string& text);

 private:
  std::vector<MetricPoint> points_;
};

/// Per-point mean/variance across repetitions (sample variance, n-1).
struct AggregatePoint {
  std::uint64_t touched_samples = 0;
  double wall_mean = 0.0, wall_var = 0.0;
  double objective_mean = 0.0, objective_var = 0.0;
  std::optional<double> gt_mean, gt_var;
};

/// Requires all runs to share the same touched-samples grid.
std::vector<AggregatePoint> aggregate_runs(std::span<const RunMetrics> runs);
std::string aggregate_csv(std::span<const AggregatePoint> points);

/// Cheap in-run instrumentation: optimizers store (touched, wall, state)
/// snapshots and the harness evaluates objective/ground-truth errors after
/// the run, outside the timed section. In parallel optimizers only worker 0
/// snapshots, so nothing shared is mutated during optimization.
struct StateSnapshot {
  std::uint64_t touched = 0;
  std::uint64_t wall_nanos = 0;
  Mat state;
};

class RunRecorder {
 public:
  explicit RunRecorder(std::uint64_t cadence) : cadence_(cadence ? cadence : 1) {}

  /// Resets the clock; call right before the optimization loop so data
  /// distribution stays outside the measured window.
  void start() {
    t0_ = std::chrono::steady_clock::now();
    snaps_.clear();
  }

  /// True when iteration (1-based) should be captured. The final iteration is
  /// excluded: the run's final point comes from the returned model.
  bool due(std::uint64_t iteration, std::uint64_t total) const {
    return iteration % cadence_ == 0 && iteration < total;
  }

  void snapshot(std::uint64_t touched, const Mat& state) {
    snaps_.push_back({touched, elapsed_nanos(), state});
  }

  std::uint64_t elapsed_nanos() const {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0_)
            .count());
  }

  std::vector<StateSnapshot> take() { return std::move(snaps_); }

 private:
  std::uint64_t cadence_;
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
  std::vector<StateSnapshot> snaps_;
};

/// Snapshot every ceil(T/1000) iterations (BATCH callers pass cadence 1).
inline std::uint64_t metric_cadence(std::uint64_t total_iterations) {
  return total_iterations == 0 ? 1 : std::max<std::uint64_t>(1, (total_iterations + 999) / 1000);
}

}  // namespace asgd
