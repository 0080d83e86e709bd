#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "asgd/mat.hpp"
#include "asgd/rng.hpp"

namespace asgd {

/// A (possibly partial) model state pushed one-sidedly into a peer's mailbox.
/// `rows` lists the prototype indices carried (distinct, sorted); payload row
/// r holds the sender's prototype rows[r].
struct UpdateMessage {
  std::uint32_t sender = 0;
  std::uint64_t sender_version = 0;
  std::vector<std::uint32_t> rows;
  Mat payload;
  bool torn = false;
};

/// Counters mirroring the message accounting of the benchmark runs.
/// After quiescence: sent == received + lost_overwritten, good <= received.
struct FabricStats {
  std::uint64_t sent = 0;
  std::uint64_t received = 0;
  std::uint64_t lost_overwritten = 0;
  std::uint64_t good = 0;  // accepted by the Parzen window
  std::uint64_t torn = 0;
};

enum class PostOutcome { Posted, Overwrote };

/// Slot-selection policy: spreads concurrent senders across the N slots of a
/// mailbox by hashing (sender, per-sender message counter).
std::size_t slot_for(std::uint32_t sender, std::uint64_t counter, std::size_t slots);

/// One worker's array of externally writable buffer slots. Writers atomically
/// swap whole messages into slots and never wait for the reader; the reader
/// drains without blocking writers. A write to an occupied slot replaces the
/// previous message (counted as loss by the Fabric).
class Mailbox {
 public:
  explicit Mailbox(std::size_t slots);
  Mailbox(Mailbox&&) noexcept;
  Mailbox& operator=(Mailbox&&) = delete;
  ~Mailbox();

  /// Swaps `msg` into `slot`; returns the message it displaced, if any.
  std::unique_ptr<UpdateMessage> put(std::size_t slot, std::unique_ptr<UpdateMessage> msg);

  /// Removes and returns the current occupant of `slot`, if any.
  std::unique_ptr<UpdateMessage> take(std::size_t slot);

  std::size_t slot_count() const { return slots_.size(); }
  std::uint64_t slot_seq(std::size_t slot) const { return slots_[slot].seq.load(std::memory_order_relaxed); }

 private:
  struct Slot {
    std::atomic<UpdateMessage*> msg{nullptr};
    std::atomic<std::uint64_t> seq{0};
  };
  std::vector<Slot> slots_;
};

/// The simulated one-sided communication fabric: one mailbox per worker,
/// many concurrent writers, exactly one reader per mailbox, global atomic
/// counters. In race-injection mode an overwrite may produce a torn message
/// interleaving prototype rows of the displaced and the new message, decided
/// by the sender's seeded stream.
class Fabric {
 public:
  Fabric(std::size_t workers, std::size_t slots_per_mailbox, bool race_injection = false,
         double torn_probability = 0.0);

  PostOutcome post(std::size_t to, UpdateMessage msg, RandomStream& sender_rng);

  /// All currently visible messages of `worker`'s mailbox, in slot order.
  std::vector<UpdateMessage> drain(std::size_t worker);

  void note_good(std::uint64_t n) { good_.fetch_add(n, std::memory_order_relaxed); }

  FabricStats stats() const;
  std::uint64_t sent_by(std::size_t worker) const {
    return sent_by_[worker].load(std::memory_order_relaxed);
  }
  std::size_t workers() const { return boxes_.size(); }
  std::size_t slots_per_mailbox() const { return slots_; }

  /// Sweeps every mailbox after the workers stopped so the conservation
  /// identity holds (drained messages count as received).
  void drain_remaining();

 private:
  std::vector<Mailbox> boxes_;
  std::size_t slots_;
  bool race_injection_;
  double torn_probability_;
  std::vector<std::atomic<std::uint64_t>> sent_by_;
  std::atomic<std::uint64_t> sent_{0};
  std::atomic<std::uint64_t> received_{0};
  std::atomic<std::uint64_t> lost_{0};
  std::atomic<std::uint64_t> good_{0};
  std::atomic<std::uint64_t> torn_{0};
};

/// `fanout` distinct recipients drawn uniformly from [0, n_workers) \ {self}.
std::vector<std::uint32_t> choose_recipients(std::uint32_t self, std::size_t n_workers,
                                             std::size_t fanout, RandomStream& rng);

/// Payload carrying ceil(fraction * k) distinct prototype rows of w, chosen
/// uniformly at random. fraction must satisfy fraction * k >= 1.
UpdateMessage partial_rows(const Mat& w, double fraction, RandomStream& rng);

}  // namespace asgd
