#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "asgd/dataset.hpp"
#include "asgd/fabric.hpp"
#include "asgd/metrics.hpp"
#include "asgd/model.hpp"
#include "asgd/optimizers.hpp"

namespace asgd {

enum class FinalAggregation { FirstWorker, MeanReduce };

struct AsgdConfig {
  RunConfig run;
  std::size_t fanout = 1;         // recipients per posted update
  double partial_fraction = 1.0;  // share of prototype rows carried per message
  std::size_t buffers = 0;        // mailbox slots N; 0 = min(n-1, 8)
  bool silent = false;            // communication off (ablation baseline)
  FinalAggregation aggregation = FinalAggregation::FirstWorker;
  bool threaded = false;  // one std::thread per worker; else seeded round-robin
  bool race_injection = false;
  double torn_probability = 0.0;

  std::size_t effective_buffers() const {
    if (buffers > 0) return buffers;
    return run.workers > 1 ? std::min<std::size_t>(run.workers - 1, 8) : 1;
  }
};

/// The update filter: accepts the peer state w_j iff the locally stepped
/// point w_i - epsilon*delta is strictly closer to w_j than w_i is, i.e. the
/// external state pulls toward the projected descent path rather than away
/// from it. Distances are summed over the payload's rows only.
bool parzen_accept(const Mat& w, const Mat& delta, double epsilon, const UpdateMessage& payload);

/// Externally modified descent step: for every prototype row covered by A
/// accepted payloads,
///   merged[r] = w[r] - (sum of payload rows + w[r]) / (A + 1) + delta_m[r],
/// rows covered by no payload reduce to delta_m alone. Payloads whose carried
/// rows are all zero are excluded from both the sum and the count.
void merge_external(const Mat& w, const Mat& delta_m,
                    std::span<const UpdateMessage* const> accepted, Mat& merged);

/// FirstWorker returns states[0]; MeanReduce the elementwise mean.
ModelState final_aggregate(std::span<const ModelState> states, FinalAggregation mode);

struct AsgdResult {
  ModelState model;
  std::vector<ModelState> worker_states;
  FabricStats fabric;
  std::vector<std::uint64_t> sent_by_worker;
  std::uint64_t aggregate_nanos = 0;
  std::uint64_t wall_nanos = 0;
};

/// Test instrumentation; not part of the run configuration.
struct AsgdHooks {
  std::function<void(std::size_t worker)> on_worker_start;
  std::function<void(std::size_t worker)> on_worker_finish;
};

/// Asynchronous parallel SGD: n workers run mini-batch descent over disjoint
/// shards, each iteration draining its mailbox, Parzen-filtering the received
/// states, merging them into the local step and posting its new state
/// one-sidedly to `fanout` random peers. No worker ever waits for another;
/// messages may be lost (overwritten) at any time. Touched: t * b * n.
///
/// With silent=true or n=1 no communication happens and the per-worker
/// states are bit-identical to simuparallel_sgd under the same seed.
AsgdResult asgd_optimize(const GradientObjective& obj, const Dataset& data, const AsgdConfig& cfg,
                         const ModelState& w0, RunRecorder* recorder = nullptr,
                         const AsgdHooks& hooks = {});

}  // namespace asgd
