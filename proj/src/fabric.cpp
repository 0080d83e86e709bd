#include "asgd/fabric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asgd {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Emulates a partially overwritten buffer: for each prototype row of the
// union, the reader may see the displaced write or the new one. Row indices
// present in only one message survive as-is.
UpdateMessage tear(UpdateMessage fresh, const UpdateMessage& old, RandomStream& rng) {
  const std::size_t d = fresh.payload.cols;
  std::vector<std::uint32_t> rows;
  std::vector<double> data;
  std::size_t i = 0, j = 0;
  while (i < fresh.rows.size() || j < old.rows.size()) {
    const double* src;
    std::uint32_t row;
    if (j >= old.rows.size() || (i < fresh.rows.size() && fresh.rows[i] < old.rows[j])) {
      row = fresh.rows[i];
      src = fresh.payload.row(i++);
    } else if (i >= fresh.rows.size() || old.rows[j] < fresh.rows[i]) {
      row = old.rows[j];
      src = old.payload.row(j++);
    } else {  // carried by both: coin flip decides which write the read sees
      row = fresh.rows[i];
      src = rng.next_below(2) == 0 ? old.payload.row(j) : fresh.payload.row(i);
      ++i;
      ++j;
    }
    rows.push_back(row);
    data.insert(data.end(), src, src + d);
  }
  UpdateMessage out;
  out.sender = fresh.sender;
  out.sender_version = fresh.sender_version;
  out.rows = std::move(rows);
  out.payload.rows = out.rows.size();
  out.payload.cols = d;
  out.payload.a = std::move(data);
  out.torn = true;
  return out;
}

}  // namespace

std::size_t slot_for(std::uint32_t sender, std::uint64_t counter, std::size_t slots) {
  return static_cast<std::size_t>(mix64((std::uint64_t(sender) << 40) ^ counter) % slots);
}

Mailbox::Mailbox(std::size_t slots) : slots_(slots) {
  if (slots == 0) throw std::invalid_argument("Mailbox: need at least one slot");
}

Mailbox::Mailbox(Mailbox&& o) noexcept : slots_(o.slots_.size()) {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    slots_[i].msg.store(o.slots_[i].msg.exchange(nullptr, std::memory_order_acq_rel),
                        std::memory_order_relaxed);
    slots_[i].seq.store(o.slots_[i].seq.load(std::memory_order_relaxed), std::memory_order_relaxed);
  }
}

Mailbox::~Mailbox() {
  for (auto& s : slots_) delete s.msg.exchange(nullptr, std::memory_order_acq_rel);
}

std::unique_ptr<UpdateMessage> Mailbox::put(std::size_t slot, std::unique_ptr<UpdateMessage> msg) {
  UpdateMessage* prev = slots_[slot].msg.exchange(msg.release(), std::memory_order_acq_rel);
  slots_[slot].seq.fetch_add(1, std::memory_order_relaxed);
  return std::unique_ptr<UpdateMessage>(prev);
}

std::unique_ptr<UpdateMessage> Mailbox::take(std::size_t slot) {
  return std::unique_ptr<UpdateMessage>(slots_[slot].msg.exchange(nullptr, std::memory_order_acq_rel));
}

Fabric::Fabric(std::size_t workers, std::size_t slots_per_mailbox, bool race_injection,
               double torn_probability)
    : slots_(slots_per_mailbox),
      race_injection_(race_injection),
      torn_probability_(torn_probability),
      sent_by_(workers) {
  if (workers == 0) throw std::invalid_argument("Fabric: need at least one worker");
  if (torn_probability < 0.0 || torn_probability > 1.0)
    throw std::invalid_argument("Fabric: torn probability must be in [0, 1]");
  boxes_.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) boxes_.emplace_back(slots_per_mailbox);
}

PostOutcome Fabric::post(std::size_t to, UpdateMessage msg, RandomStream& sender_rng) {
  if (to >= boxes_.size()) throw std::invalid_argument("Fabric::post: no such worker");
  const std::uint32_t sender = msg.sender;
  const std::uint64_t counter = sent_by_[sender].fetch_add(1, std::memory_order_relaxed);
  const std::size_t slot = slot_for(sender, counter, slots_);
  sent_.fetch_add(1, std::memory_order_relaxed);

  Mailbox& box = boxes_[to];
  PostOutcome outcome = PostOutcome::Posted;

  if (race_injection_) {
    // Claim the current occupant first so its rows can interleave with ours.
    std::unique_ptr<UpdateMessage> old = box.take(slot);
    if (old) {
      lost_.fetch_add(1, std::memory_order_relaxed);
      outcome = PostOutcome::Overwrote;
      if (sender_rng.next_double() < torn_probability_) {
        msg = tear(std::move(msg), *old, sender_rng);
        torn_.fetch_add(1, std::memory_order_relaxed);
      }
    }
  }

  std::unique_ptr<UpdateMessage> displaced =
      box.put(slot, std::make_unique<UpdateMessage>(std::move(msg)));
  if (displaced) {
    lost_.fetch_add(1, std::memory_order_relaxed);
    outcome = PostOutcome::Overwrote;
  }
  return outcome;
}

std::vector<UpdateMessage> Fabric::drain(std::size_t worker) {
  if (worker >= boxes_.size()) throw std::invalid_argument("Fabric::drain: no such worker");
  std::vector<UpdateMessage> out;
  Mailbox& box = boxes_[worker];
  for (std::size_t s = 0; s < box.slot_count(); ++s) {
    if (auto msg = box.take(s)) {
      received_.fetch_add(1, std::memory_order_relaxed);
      out.push_back(std::move(*msg));
    }
  }
  return out;
}

void Fabric::drain_remaining() {
  for (std::size_t w = 0; w < boxes_.size(); ++w) (void)drain(w);
}

FabricStats Fabric::stats() const {
  FabricStats s;
  s.sent = sent_.load(std::memory_order_relaxed);
  s.received = received_.load(std::memory_order_relaxed);
  s.lost_overwritten = lost_.load(std::memory_order_relaxed);
  s.good = good_.load(std::memory_order_relaxed);
  s.torn = torn_.load(std::memory_order_relaxed);
  return s;
}

std::vector<std::uint32_t> choose_recipients(std::uint32_t self, std::size_t n_workers,
                                             std::size_t fanout, RandomStream& rng) {
  if (fanout >= n_workers)
    throw std::invalid_argument("choose_recipients: fanout must be < worker count");
  std::vector<std::uint32_t> candidates;
  candidates.reserve(n_workers - 1);
  for (std::uint32_t i = 0; i < n_workers; ++i)
    if (i != self) candidates.push_back(i);
  for (std::size_t i = 0; i < fanout; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(fanout);
  return candidates;
}

UpdateMessage partial_rows(const Mat& w, double fraction, RandomStream& rng) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("partial_rows: fraction must be in (0, 1]");
  const double scaled = fraction * static_cast<double>(w.rows);
  std::size_t count = static_cast<std::size_t>(std::ceil(scaled - 1e-9));
  count = std::clamp<std::size_t>(count, 1, w.rows);

  UpdateMessage msg;
  msg.rows = pick_distinct(w.rows, count, rng);
  msg.payload.rows = count;
  msg.payload.cols = w.cols;
  msg.payload.a.resize(count * w.cols);
  for (std::size_t r = 0; r < count; ++r) {
    const double* src = w.row(msg.rows[r]);
    std::copy(src, src + w.cols, msg.payload.row(r));
  }
  return msg;
}

}  // namespace asgd
