#pragma once

#include <cstdint>
#include <vector>

#include "asgd/dataset.hpp"
#include "asgd/metrics.hpp"
#include "asgd/model.hpp"

namespace asgd {

/// Shared optimizer parameters: iterations T, step size epsilon, mini-batch
/// size b, worker count n and the run seed.
struct RunConfig {
  std::uint64_t iterations = 0;  // T
  double epsilon = 0.0;
  std::size_t batch_size = 1;  // b
  std::size_t workers = 1;     // n
  std::uint64_t seed = 0;
};

/// Disjoint per-worker sample shards: one global seeded permutation of the
/// dataset, worker i owning the contiguous window [i*H, (i+1)*H) of the
/// permuted order with H = floor(m/n). The m - n*H tail samples are dropped.
/// Rows are gathered into worker-contiguous storage so shards stay
/// cache-friendly; this copy counts as data distribution, not optimization.
class Shards {
 public:
  Shards(const Dataset& data, std::size_t workers, std::uint64_t seed);

  Samples shard(std::size_t worker) const {
    return {storage_.data() + worker * shard_size_ * dim_, shard_size_, dim_};
  }
  std::size_t shard_size() const { return shard_size_; }
  std::size_t count() const { return workers_; }

 private:
  std::size_t workers_;
  std::size_t shard_size_;
  std::size_t dim_;
  std::vector<double> storage_;
};

/// Full-dataset descent: T iterations, each applying the mean delta over all
/// of X. Touched-samples accounting: t * m.
ModelState batch_optimize(const GradientObjective& obj, const Dataset& data, const RunConfig& cfg,
                          const ModelState& w0, RunRecorder* recorder = nullptr);

/// Plain online SGD: T single-sample steps, the sample index drawn uniformly
/// at random from the whole dataset each iteration. Touched: t.
ModelState sgd_optimize(const GradientObjective& obj, const Dataset& data, const RunConfig& cfg,
                        const ModelState& w0, RunRecorder* recorder = nullptr);

/// Mini-batch SGD: each iteration draws b uniform samples, accumulates their
/// deltas into one mean step. Shares sgd_optimize's draw stream, so b=1
/// reproduces it exactly. Touched: t * b.
ModelState minibatch_sgd_optimize(const GradientObjective& obj, const Dataset& data,
                                  const RunConfig& cfg, const ModelState& w0,
                                  RunRecorder* recorder = nullptr);

struct SimuResult {
  ModelState model;
  std::vector<ModelState> worker_states;
  std::uint64_t aggregate_nanos = 0;  // cost of the final mean-reduce barrier
  std::uint64_t wall_nanos = 0;
};

/// Communication-free parallel SGD: n workers run independent passes over
/// their shuffled shards (b consecutive samples per iteration, aggregated
/// into one step; b=1 is the classic single-sample walk), followed by a
/// single mean aggregation. Deterministic mode runs workers sequentially;
/// threaded mode uses one std::thread per worker. Touched: t * b * n.
SimuResult simuparallel_sgd(const GradientObjective& obj, const Dataset& data, const RunConfig& cfg,
                            const ModelState& w0, RunRecorder* recorder = nullptr,
                            bool threaded = false);

}  // namespace asgd
