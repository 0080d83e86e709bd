#include "asgd/async_sgd.hpp"

#include <chrono>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "asgd/rng.hpp"

namespace asgd {

namespace {

std::uint64_t elapsed_nanos(std::chrono::steady_clock::time_point t0) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0)
          .count());
}

void validate(const Dataset& data, const AsgdConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("asgd: empty dataset");
  if (!(cfg.run.epsilon > 0.0)) throw std::invalid_argument("asgd: epsilon must be > 0");
  if (cfg.run.batch_size < 1) throw std::invalid_argument("asgd: batch size must be >= 1");
  if (cfg.run.workers < 1) throw std::invalid_argument("asgd: worker count must be >= 1");
  if (!(cfg.partial_fraction > 0.0) || cfg.partial_fraction > 1.0)
    throw std::invalid_argument("asgd: partial_fraction must be in (0, 1]");
  if (cfg.torn_probability < 0.0 || cfg.torn_probability > 1.0)
    throw std::invalid_argument("asgd: torn_probability must be in [0, 1]");
  if (!cfg.silent && cfg.run.workers > 1 && cfg.fanout >= cfg.run.workers)
    throw std::invalid_argument("asgd: fanout must be < worker count");
}

struct WorkerCtx {
  std::uint32_t id = 0;
  ModelState state;
  Samples shard;
  std::size_t cursor = 0;
  RandomStream comm_rng;
  Mat delta_m;
  Mat merged;
  std::vector<UpdateMessage> inbox;
  std::vector<const UpdateMessage*> accepted;

  WorkerCtx(std::uint32_t id_, const ModelState& w0, Samples shard_, std::uint64_t seed)
      : id(id_), state(w0), shard(shard_), comm_rng(seed, kStreamWorkerBase + id_) {}
};

void run_iteration(WorkerCtx& wk, const GradientObjective& obj, const AsgdConfig& cfg,
                   Fabric* fabric) {
  const Samples batch = wk.shard.slice(wk.cursor, cfg.run.batch_size);
  wk.cursor += cfg.run.batch_size;
  obj.batch_descent_step(wk.state.w(), batch, wk.delta_m);

  wk.accepted.clear();
  if (fabric) {
    // Drain after the local delta and before the step: incoming states
    // correct this update, never a later one.
    wk.inbox = fabric->drain(wk.id);
    for (const UpdateMessage& msg : wk.inbox) {
      if (!msg.payload.all_finite()) continue;  // torn garbage never crashes a worker
      if (parzen_accept(wk.state.w(), wk.delta_m, cfg.run.epsilon, msg))
        wk.accepted.push_back(&msg);
    }
    fabric->note_good(wk.accepted.size());
  }

  merge_external(wk.state.w(), wk.delta_m, wk.accepted, wk.merged);
  wk.state = apply_step(std::move(wk.state), wk.merged, cfg.run.epsilon);

  if (fabric) {
    UpdateMessage msg = partial_rows(wk.state.w(), cfg.partial_fraction, wk.comm_rng);
    msg.sender = wk.id;
    msg.sender_version = wk.state.version();
    const auto recipients =
        choose_recipients(wk.id, cfg.run.workers, cfg.fanout, wk.comm_rng);
    for (std::size_t r = 0; r < recipients.size(); ++r) {
      if (r + 1 == recipients.size())
        fabric->post(recipients[r], std::move(msg), wk.comm_rng);
      else
        fabric->post(recipients[r], msg, wk.comm_rng);
    }
  }
}

}  // namespace

bool parzen_accept(const Mat& w, const Mat& delta, double epsilon, const UpdateMessage& payload) {
  require_shape(w, delta, "parzen_accept");
  if (payload.rows.size() != payload.payload.rows || payload.payload.cols != w.cols)
    throw std::invalid_argument("parzen_accept: malformed payload");

  double stepped_dist = 0.0, current_dist = 0.0;
  for (std::size_t r = 0; r < payload.rows.size(); ++r) {
    const std::uint32_t row = payload.rows[r];
    if (row >= w.rows) throw std::invalid_argument("parzen_accept: payload row out of range");
    const double* wr = w.row(row);
    const double* dr = delta.row(row);
    const double* pr = payload.payload.row(r);
    for (std::size_t j = 0; j < w.cols; ++j) {
      const double stepped = wr[j] - epsilon * dr[j];
      const double a = stepped - pr[j];
      const double b = wr[j] - pr[j];
      stepped_dist += a * a;
      current_dist += b * b;
    }
  }
  return stepped_dist < current_dist;
}

void merge_external(const Mat& w, const Mat& delta_m,
                    std::span<const UpdateMessage* const> accepted, Mat& merged) {
  require_shape(w, delta_m, "merge_external");
  merged = delta_m;
  if (accepted.empty()) return;

  const std::size_t k = w.rows, d = w.cols;
  std::vector<double> sum(k * d, 0.0);
  std::vector<std::uint32_t> cover(k, 0);
  for (const UpdateMessage* msg : accepted) {
    double norm_sq = 0.0;
    for (double v : msg->payload.a) norm_sq += v * v;
    if (norm_sq == 0.0) continue;  // zero-norm state: an empty buffer, not a peer
    for (std::size_t r = 0; r < msg->rows.size(); ++r) {
      const std::uint32_t row = msg->rows[r];
      const double* src = msg->payload.row(r);
      double* dst = sum.data() + row * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      ++cover[row];
    }
  }

  for (std::size_t p = 0; p < k; ++p) {
    if (cover[p] == 0) continue;
    const double inv = 1.0 / static_cast<double>(cover[p] + 1);
    const double* wr = w.row(p);
    const double* dm = delta_m.row(p);
    const double* sr = sum.data() + p * d;
    double* out = merged.row(p);
    for (std::size_t j = 0; j < d; ++j) out[j] = wr[j] - (sr[j] + wr[j]) * inv + dm[j];
  }
}

ModelState final_aggregate(std::span<const ModelState> states, FinalAggregation mode) {
  if (states.empty()) throw std::invalid_argument("final_aggregate: no states");
  if (mode == FinalAggregation::FirstWorker) return states[0];
  Mat mean(states[0].prototypes(), states[0].dim());
  for (const ModelState& s : states)
    for (std::size_t i = 0; i < mean.a.size(); ++i) mean.a[i] += s.w().a[i];
  const double inv_n = 1.0 / static_cast<double>(states.size());
  for (double& v : mean.a) v *= inv_n;
  return ModelState(std::move(mean));
}

AsgdResult asgd_optimize(const GradientObjective& obj, const Dataset& data, const AsgdConfig& cfg,
                         const ModelState& w0, RunRecorder* recorder, const AsgdHooks& hooks) {
  validate(data, cfg);
  const Shards shards(data, cfg.run.workers, cfg.run.seed);
  if (shards.shard_size() < cfg.run.iterations * cfg.run.batch_size)
    throw std::invalid_argument("asgd: a worker would exhaust its shard (H < T*b)");

  const std::size_t n = cfg.run.workers;
  const bool comm = !cfg.silent && n > 1 && cfg.fanout > 0;
  std::unique_ptr<Fabric> fabric;
  if (comm)
    fabric = std::make_unique<Fabric>(n, cfg.effective_buffers(), cfg.race_injection,
                                      cfg.torn_probability);

  std::vector<WorkerCtx> workers;
  workers.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    workers.emplace_back(static_cast<std::uint32_t>(i), w0, shards.shard(i), cfg.run.seed);

  if (recorder) recorder->start();
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t T = cfg.run.iterations;
  const std::uint64_t touched_per_round = cfg.run.batch_size * n;

  if (cfg.threaded && n > 1) {
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      threads.emplace_back([&, i] {
        WorkerCtx& wk = workers[i];
        if (hooks.on_worker_start) hooks.on_worker_start(i);
        for (std::uint64_t t = 0; t < T; ++t) {
          run_iteration(wk, obj, cfg, fabric.get());
          if (i == 0 && recorder && recorder->due(t + 1, T))
            recorder->snapshot((t + 1) * touched_per_round, wk.state.w());
        }
        if (hooks.on_worker_finish) hooks.on_worker_finish(i);
      });
    }
    for (auto& th : threads) th.join();
  } else {
    // Deterministic mode: a seeded permutation of the workers per round.
    RandomStream sched = seeded_rng(cfg.run.seed, kStreamSchedule);
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = 0; i < n; ++i)
      if (hooks.on_worker_start) hooks.on_worker_start(i);
    for (std::uint64_t t = 0; t < T; ++t) {
      fisher_yates(std::span<std::uint32_t>(order), sched);
      for (const std::uint32_t id : order) {
        run_iteration(workers[id], obj, cfg, fabric.get());
        if (id == 0 && recorder && recorder->due(t + 1, T))
          recorder->snapshot((t + 1) * touched_per_round, workers[id].state.w());
      }
    }
  }

  if (fabric) fabric->drain_remaining();

  std::vector<ModelState> states;
  states.reserve(n);
  for (WorkerCtx& wk : workers) states.push_back(std::move(wk.state));

  const auto agg0 = std::chrono::steady_clock::now();
  ModelState model = final_aggregate(states, cfg.aggregation);
  const std::uint64_t aggregate_nanos = elapsed_nanos(agg0);
  const std::uint64_t wall_nanos = elapsed_nanos(t0);

  AsgdResult result{std::move(model), std::move(states), FabricStats{}, {}, aggregate_nanos,
                    wall_nanos};
  if (fabric) {
    result.fabric = fabric->stats();
    result.sent_by_worker.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.sent_by_worker[i] = fabric->sent_by(i);
  }
  return result;
}

}  // namespace asgd
