#include "asgd/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "asgd/rng.hpp"

namespace asgd {

namespace {

void validate_common(const Dataset& data, const RunConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("optimizer: empty dataset");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("optimizer: epsilon must be > 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("optimizer: batch size must be >= 1");
  if (cfg.workers < 1) throw std::invalid_argument("optimizer: worker count must be >= 1");
}

std::uint64_t elapsed_nanos(std::chrono::steady_clock::time_point t0) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0)
          .count());
}

}  // namespace

Shards::Shards(const Dataset& data, std::size_t workers, std::uint64_t seed)
    : workers_(workers), dim_(data.dim()) {
  if (workers == 0) throw std::invalid_argument("Shards: worker count must be >= 1");
  if (data.size() < workers) throw std::invalid_argument("Shards: fewer samples than workers");
  shard_size_ = data.size() / workers;

  std::vector<std::uint32_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0u);
  RandomStream rng = seeded_rng(seed, kStreamShuffle);
  fisher_yates(std::span<std::uint32_t>(perm), rng);

  const Samples all = data.samples();
  storage_.resize(workers_ * shard_size_ * dim_);
  for (std::size_t i = 0; i < workers_ * shard_size_; ++i) {
    const auto src = all.row(perm[i]);
    std::copy(src.begin(), src.end(), storage_.begin() + i * dim_);
  }
}

ModelState batch_optimize(const GradientObjective& obj, const Dataset& data, const RunConfig& cfg,
                          const ModelState& w0, RunRecorder* recorder) {
  validate_common(data, cfg);
  ModelState w = w0;
  const Samples X = data.samples();
  Mat delta;
  if (recorder) recorder->start();
  for (std::uint64_t t = 1; t <= cfg.iterations; ++t) {
    obj.batch_descent_step(w.w(), X, delta);
    w = apply_step(std::move(w), delta, cfg.epsilon);
    if (recorder && recorder->due(t, cfg.iterations)) recorder->snapshot(t * data.size(), w.w());
  }
  return w;
}

ModelState sgd_optimize(const GradientObjective& obj, const Dataset& data, const RunConfig& cfg,
                        const ModelState& w0, RunRecorder* recorder) {
  validate_common(data, cfg);
  ModelState w = w0;
  const Samples X = data.samples();
  RandomStream draw = seeded_rng(cfg.seed, kStreamDraw);
  Mat delta;
  if (recorder) recorder->start();
  for (std::uint64_t t = 1; t <= cfg.iterations; ++t) {
    const std::size_t j = static_cast<std::size_t>(draw.next_below(X.count));
    obj.descent_step(w.w(), X.row(j), delta);
    w = apply_step(std::move(w), delta, cfg.epsilon);
    if (recorder && recorder->due(t, cfg.iterations)) recorder->snapshot(t, w.w());
  }
  return w;
}

ModelState minibatch_sgd_optimize(const GradientObjective& obj, const Dataset& data,
                                  const RunConfig& cfg, const ModelState& w0,
                                  RunRecorder* recorder) {
  validate_common(data, cfg);
  if (cfg.batch_size > data.size())
    throw std::invalid_argument("minibatch: batch size exceeds dataset size");
  ModelState w = w0;
  const Samples X = data.samples();
  RandomStream draw = seeded_rng(cfg.seed, kStreamDraw);
  const std::size_t b = cfg.batch_size, d = X.dim;
  std::vector<double> gathered(b * d);
  Mat delta;
  if (recorder) recorder->start();
  for (std::uint64_t t = 1; t <= cfg.iterations; ++t) {
    for (std::size_t i = 0; i < b; ++i) {
      const auto src = X.row(static_cast<std::size_t>(draw.next_below(X.count)));
      std::copy(src.begin(), src.end(), gathered.begin() + i * d);
    }
    obj.batch_descent_step(w.w(), Samples{gathered.data(), b, d}, delta);
    w = apply_step(std::move(w), delta, cfg.epsilon);
    if (recorder && recorder->due(t, cfg.iterations)) recorder->snapshot(t * b, w.w());
  }
  return w;
}

SimuResult simuparallel_sgd(const GradientObjective& obj, const Dataset& data, const RunConfig& cfg,
                            const ModelState& w0, RunRecorder* recorder, bool threaded) {
  validate_common(data, cfg);
  const Shards shards(data, cfg.workers, cfg.seed);
  if (shards.shard_size() < cfg.iterations * cfg.batch_size)
    throw std::invalid_argument("simuparallel: a worker would exhaust its shard (H < T*b)");

  const std::size_t n = cfg.workers;
  std::vector<ModelState> states(n, w0);
  if (recorder) recorder->start();
  const auto t0 = std::chrono::steady_clock::now();

  auto worker_loop = [&](std::size_t i) {
    ModelState& w = states[i];
    const Samples shard = shards.shard(i);
    Mat delta;
    for (std::uint64_t t = 0; t < cfg.iterations; ++t) {
      obj.batch_descent_step(w.w(), shard.slice(t * cfg.batch_size, cfg.batch_size), delta);
      w = apply_step(std::move(w), delta, cfg.epsilon);
      if (i == 0 && recorder && recorder->due(t + 1, cfg.iterations))
        recorder->snapshot((t + 1) * cfg.batch_size * n, w.w());
    }
  };

  if (threaded && n > 1) {
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker_loop, i);
    for (auto& th : threads) th.join();
  } else {
    for (std::size_t i = 0; i < n; ++i) worker_loop(i);
  }

  const auto agg0 = std::chrono::steady_clock::now();
  Mat mean(w0.prototypes(), w0.dim());
  for (const ModelState& s : states)
    for (std::size_t i = 0; i < mean.a.size(); ++i) mean.a[i] += s.w().a[i];
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : mean.a) v *= inv_n;

  SimuResult result{ModelState(std::move(mean)), std::move(states), elapsed_nanos(agg0),
                    elapsed_nanos(t0)};
  return result;
}

}  // namespace asgd
