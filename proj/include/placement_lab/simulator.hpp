// Copyright 2026 The placement-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Event-driven failure/repair simulation.
//
// Idealized mode: a failing node's copies are re-placed instantly by the
// policy, so every block keeps exactly d copies.
//
// Detailed mode: failures destroy data; periodic maintenance detects missing
// copies, the block root re-replicates them through a per-source FIFO link,
// and a block whose last copy disappears is lost.
//
// Simulation time is in days. Events at equal times are ordered failures,
// maintenance, transfer completions, snapshots; within a class by slot.

#ifndef PLACEMENT_LAB_SIMULATOR_HPP
#define PLACEMENT_LAB_SIMULATOR_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <optional>
#include <queue>
#include <random>
#include <tuple>
#include <utility>
#include <vector>

#include "placement_lab/config.hpp"
#include "placement_lab/core.hpp"
#include "placement_lab/policies.hpp"

namespace placement_lab {

enum class EventKind : std::uint8_t { failure, repair_batch, block_lost, snapshot };

/// `slot` is the failed node (failure, repair_batch in idealized mode) or the
/// sending root (repair_batch in detailed mode, where it is the first root of
/// the tick). `value` is the failed load, the number of copies placed or
/// enqueued, the lost block index, or the snapshot index.
struct Event {
  double time = 0.0;
  EventKind kind = EventKind::failure;
  Slot slot = 0;
  std::uint64_t value = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

struct NodeSample {
  double age_days = 0.0;
  std::uint32_t load = 0;
  friend bool operator==(const NodeSample&, const NodeSample&) = default;
};

struct Snapshot {
  double time = 0.0;
  std::vector<NodeSample> nodes;  // indexed by slot
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// Copies received by the tagged slot and the exact compensator of that
/// counting process, sampled at snapshot times.
struct TaggedSample {
  double time = 0.0;
  std::uint64_t arrivals = 0;
  double compensator = 0.0;
  friend bool operator==(const TaggedSample&, const TaggedSample&) = default;
};

struct Diagnostics {
  Slot tagged = 0;
  // jump_histogram[k]: failures of other nodes that sent k copies to the
  // tagged node.
  std::vector<std::uint64_t> jump_histogram;
  std::uint64_t other_failures = 0;
  std::uint64_t other_failed_load = 0;  // sum of the loads of those nodes
  std::vector<TaggedSample> tagged_series;
  friend bool operator==(const Diagnostics&, const Diagnostics&) = default;
};

struct EventTrace {
  Mode mode = Mode::idealized;
  PolicyKind policy = PolicyKind::random;
  std::uint32_t n_nodes = 0;
  std::uint64_t total_copies = 0;
  double mtbf_days = 1.0;
  double horizon_days = 0.0;

  std::vector<Event> events;
  std::vector<Snapshot> snapshots;
  Diagnostics diagnostics;

  std::uint64_t failures = 0;
  std::uint64_t copies_placed = 0;  // idealized re-placements or completed transfers
  std::uint64_t transfers_enqueued = 0;
  std::uint64_t transfers_dropped = 0;
  std::uint64_t lost_blocks = 0;

  friend bool operator==(const EventTrace&, const EventTrace&) = default;
};

/// Independent exponential lifetimes per slot.
class FailureClock {
 public:
  FailureClock(std::size_t n, double mtbf_days, std::uint64_t seed)
      : rng_(seed), lifetime_(1.0 / mtbf_days), next_(n) {
    for (auto& t : next_) t = lifetime_(rng_);
  }

  double next(Slot s) const { return next_[s]; }
  double rearm(Slot s, double now) { return next_[s] = now + lifetime_(rng_); }
  std::size_t size() const { return next_.size(); }

 private:
  Rng rng_;
  std::exponential_distribution<double> lifetime_;
  std::vector<double> next_;
};

struct BatchOutcome {
  std::uint32_t copies = 0;
  std::uint32_t to_tagged = 0;
};

/// Re-places every copy held by `slot` via the policy, excluding each block's
/// current holders (the failing node among them), then restarts the slot
/// empty with a new ring position and generation.
inline BatchOutcome fail_node_idealized(SystemState& st, Slot slot,
                                        PolicyKind policy, Rng& rng,
                                        double now = 0.0,
                                        std::optional<Slot> tagged = {}) {
  BatchOutcome out;
  const auto copies = std::move(st.node_blocks[slot]);
  st.node_blocks[slot].clear();
  for (BlockIndex b : copies) {
    auto& holders = st.blocks[b].holders;
    assert(holders.size() < st.n_nodes());
    const Slot dest = select(policy, st.loads, holders, rng);
    *std::find(holders.begin(), holders.end(), slot) = dest;
    st.node_blocks[dest].push_back(b);
    st.loads.increment(dest);
    ++out.copies;
    if (tagged && dest == *tagged) ++out.to_tagged;
  }
  st.loads.reset(slot);
  st.replace_node(slot, now, rng);
  return out;
}

namespace detail {

enum EventClass : int { kFailure = 0, kMaintenance = 1, kTransfer = 2, kSnapshot = 3 };

struct Scheduled {
  double time;
  int cls;
  Slot slot;
  std::uint64_t tag;
  bool operator>(const Scheduled& o) const {
    return std::tie(time, cls, slot, tag) > std::tie(o.time, o.cls, o.slot, o.tag);
  }
};

using EventQueue =
    std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>>;

inline Snapshot take_snapshot(const SystemState& st, double now) {
  Snapshot snap{now, {}};
  snap.nodes.reserve(st.n_nodes());
  for (Slot s = 0; s < st.n_nodes(); ++s)
    snap.nodes.push_back({st.age_days(s, now), st.loads[s]});
  return snap;
}

inline void require_mode(const SimConfig& config, Mode mode) {
  config.validate();
  if (config.mode != mode)
    throw ConfigError("mode", std::string("expected ") + std::string(to_string(mode)));
}

inline EventTrace make_trace(const SimConfig& config, const SystemState& st) {
  EventTrace tr;
  tr.mode = config.mode;
  tr.policy = config.policy;
  tr.n_nodes = config.n_nodes;
  tr.total_copies = st.total_copies;
  tr.mtbf_days = config.mtbf_days;
  tr.horizon_days = config.horizon_days;
  return tr;
}

}  // namespace detail

/// Simulates the idealized model. Slot 0 is the tagged node of the
/// diagnostics.
inline EventTrace run_idealized(const SimConfig& config, Rng& rng,
                                SystemState* final_state = nullptr) {
  detail::require_mode(config, Mode::idealized);
  SystemState st = place_initial(config, rng);
  FailureClock clock(config.n_nodes, config.mtbf_days, rng());
  EventTrace tr = detail::make_trace(config, st);
  auto& diag = tr.diagnostics;
  diag.tagged = 0;

  const double rate_scale =
      config.n_nodes > 1 ? 1.0 / ((config.n_nodes - 1.0) * config.mtbf_days) : 0.0;
  const double total = static_cast<double>(st.total_copies);
  double last = 0.0;
  double compensator = 0.0;
  std::uint64_t arrivals = 0;
  auto advance = [&](double t) {
    compensator += (total - st.loads[diag.tagged]) * rate_scale * (t - last);
    last = t;
  };

  detail::EventQueue queue;
  for (Slot s = 0; s < config.n_nodes; ++s)
    if (clock.next(s) <= config.horizon_days)
      queue.push({clock.next(s), detail::kFailure, s, 0});

  std::uint64_t snap_index = 0;
  auto snap_time = [&](std::uint64_t k) { return k * config.snapshot_period_days; };

  auto record_snapshot = [&](double t) {
    tr.events.push_back({t, EventKind::snapshot, 0, snap_index});
    tr.snapshots.push_back(detail::take_snapshot(st, t));
    diag.tagged_series.push_back({t, arrivals, compensator});
    ++snap_index;
  };

  for (;;) {
    const double ts = snap_time(snap_index);
    const bool snap_due = ts <= config.horizon_days;
    if (queue.empty() && !snap_due) break;
    if (!queue.empty() && (!snap_due || queue.top().time <= ts)) {
      const auto ev = queue.top();
      queue.pop();
      advance(ev.time);
      const Slot s = ev.slot;
      const std::uint32_t failed_load = st.loads[s];
      tr.events.push_back({ev.time, EventKind::failure, s, failed_load});
      const auto batch =
          fail_node_idealized(st, s, config.policy, rng, ev.time, diag.tagged);
      tr.events.push_back({ev.time, EventKind::repair_batch, s, batch.copies});
      ++tr.failures;
      tr.copies_placed += batch.copies;
      if (s != diag.tagged) {
        if (diag.jump_histogram.size() <= batch.to_tagged)
          diag.jump_histogram.resize(batch.to_tagged + 1, 0);
        ++diag.jump_histogram[batch.to_tagged];
        ++diag.other_failures;
        diag.other_failed_load += failed_load;
        arrivals += batch.to_tagged;
      }
      const double next = clock.rearm(s, ev.time);
      if (next <= config.horizon_days) queue.push({next, detail::kFailure, s, 0});
    } else {
      advance(ts);
      record_snapshot(ts);
    }
  }
  if (final_state) *final_state = std::move(st);
  return tr;
}

namespace detail {

struct Transfer {
  BlockIndex block;
  NodeId dest;
};

// Mutable bookkeeping of a detailed-mode run.
class DetailedRun {
 public:
  DetailedRun(const SimConfig& config, Rng& rng)
      : cfg_(config),
        rng_(rng),
        st_(place_initial(config, rng)),
        clock_(config.n_nodes, config.mtbf_days, rng()),
        effective_(std::vector<std::uint32_t>(st_.loads.values().begin(),
                                              st_.loads.values().end())),
        in_flight_(st_.blocks.size()),
        pending_flag_(st_.blocks.size(), 0),
        fifo_(config.n_nodes),
        rooted_work_(config.n_nodes),
        reassign_work_(config.n_nodes),
        transfer_days_(config.transfer_seconds() / 86400.0),
        maintenance_days_(config.maintenance_period_hours / 24.0) {
    tr_ = make_trace(config, st_);
  }

  EventTrace run(SystemState* final_state) {
    for (Slot s = 0; s < cfg_.n_nodes; ++s) push_failure(s, clock_.next(s));
    push_if_due(maintenance_days_, kMaintenance, 0, 1);
    queue_.push({0.0, kSnapshot, 0, 0});

    while (!queue_.empty()) {
      const auto ev = queue_.top();
      queue_.pop();
      switch (ev.cls) {
        case kFailure: on_failure(ev.slot, ev.time); break;
        case kMaintenance: on_maintenance(ev.time, ev.tag); break;
        case kTransfer: on_transfer(ev.slot, ev.time, ev.tag); break;
        case kSnapshot: on_snapshot(ev.time, ev.tag); break;
      }
    }
    tr_.lost_blocks = st_.lost_blocks;
    if (final_state) *final_state = std::move(st_);
    return std::move(tr_);
  }

  const SystemState& state() const { return st_; }

 private:
  void push_if_due(double t, int cls, Slot slot, std::uint64_t tag) {
    if (t <= cfg_.horizon_days) queue_.push({t, cls, slot, tag});
  }
  void push_failure(Slot s, double t) { push_if_due(t, kFailure, s, 0); }

  void mark_pending(BlockIndex b) {
    if (st_.blocks[b].lost || pending_flag_[b]) return;
    pending_flag_[b] = 1;
    pending_.push_back(b);
  }

  void forget_in_flight(BlockIndex b, NodeId dest) {
    auto& v = in_flight_[b];
    if (auto it = std::find(v.begin(), v.end(), dest); it != v.end()) v.erase(it);
  }

  std::size_t alive_in_flight(BlockIndex b) const {
    std::size_t k = 0;
    for (const auto& d : in_flight_[b]) k += st_.alive(d);
    return k;
  }

  void start_next(Slot src, double now) {
    if (!fifo_[src].empty())
      queue_.push({now + transfer_days_, kTransfer, src, st_.nodes[src].generation});
  }

  void on_failure(Slot s, double now) {
    ++tr_.failures;
    tr_.events.push_back({now, EventKind::failure, s, st_.loads[s]});

    for (const auto& t : fifo_[s]) {
      if (st_.alive(t.dest)) effective_.decrement(t.dest.slot);
      forget_in_flight(t.block, t.dest);
      ++tr_.transfers_dropped;
      mark_pending(t.block);
    }
    fifo_[s].clear();

    for (BlockIndex b : st_.node_blocks[s]) {
      auto& blk = st_.blocks[b];
      blk.holders.erase(std::find(blk.holders.begin(), blk.holders.end(), s));
      if (!blk.holders.empty()) {
        mark_pending(b);
        continue;
      }
      blk.lost = true;
      ++st_.lost_blocks;
      tr_.events.push_back({now, EventKind::block_lost, s, b});
      for (const auto& d : in_flight_[b])
        if (st_.alive(d)) effective_.decrement(d.slot);
      in_flight_[b].clear();
    }

    effective_.reset(s);
    st_.replace_node(s, now, rng_);
    push_failure(s, clock_.rearm(s, now));
  }

  void replicate(BlockIndex b, Slot root, double now, std::uint64_t& enqueued) {
    const auto& blk = st_.blocks[b];
    const std::size_t have = blk.holders.size() + alive_in_flight(b);
    for (std::size_t k = have; k < st_.replication; ++k) {
      excluded_.assign(blk.holders.begin(), blk.holders.end());
      for (const auto& d : in_flight_[b])
        if (st_.alive(d)) excluded_.push_back(d.slot);
      const Slot dest = select(cfg_.policy, effective_, excluded_, rng_);
      effective_.increment(dest);
      const NodeId dest_id = st_.id_of(dest);
      in_flight_[b].push_back(dest_id);
      const bool idle = fifo_[root].empty();
      fifo_[root].push_back({b, dest_id});
      if (idle) start_next(root, now);
      ++enqueued;
    }
  }

  // (i) every root re-replicates the missing copies of its blocks; (ii) the
  // holders of a block whose root failed elect the clockwise-successor
  // holder. Nodes act in slot order, each doing (i) then (ii). A node that
  // elects itself repairs at once; another new root repairs in this tick if
  // its turn is still to come, else in the next one.
  void on_maintenance(double now, std::uint64_t tick) {
    std::vector<BlockIndex> work;
    work.swap(pending_);
    for (BlockIndex b : work) {
      pending_flag_[b] = 0;
      const auto& blk = st_.blocks[b];
      if (blk.lost) continue;
      if (st_.alive(blk.root))
        rooted_work_[blk.root.slot].push_back(b);
      else
        reassign_work_[*std::min_element(blk.holders.begin(), blk.holders.end())]
            .push_back(b);
    }

    std::uint64_t enqueued = 0;
    std::optional<Slot> first_root;
    for (Slot s = 0; s < cfg_.n_nodes; ++s) {
      for (BlockIndex b : rooted_work_[s]) {
        const auto before = enqueued;
        replicate(b, s, now, enqueued);
        if (enqueued > before && !first_root) first_root = s;
      }
      rooted_work_[s].clear();
      for (BlockIndex b : reassign_work_[s]) {
        auto& blk = st_.blocks[b];
        const Slot r = st_.ring_successor_holder(blk);
        blk.root = st_.id_of(r);
        if (r == s) {
          const auto before = enqueued;
          replicate(b, s, now, enqueued);
          if (enqueued > before && !first_root) first_root = s;
        } else if (r > s) {
          rooted_work_[r].push_back(b);
        } else {
          mark_pending(b);
        }
      }
      reassign_work_[s].clear();
    }
    if (enqueued > 0) {
      tr_.transfers_enqueued += enqueued;
      tr_.events.push_back({now, EventKind::repair_batch, *first_root, enqueued});
    }
    push_if_due((tick + 1) * maintenance_days_, kMaintenance, 0, tick + 1);
  }

  void on_transfer(Slot src, double now, std::uint64_t generation) {
    if (st_.nodes[src].generation != generation || fifo_[src].empty()) return;
    const Transfer t = fifo_[src].front();
    fifo_[src].pop_front();
    forget_in_flight(t.block, t.dest);
    if (st_.alive(t.dest) && !st_.blocks[t.block].lost) {
      st_.add_copy(t.block, t.dest.slot);
      ++tr_.copies_placed;
    } else {
      ++tr_.transfers_dropped;
    }
    if (st_.blocks[t.block].holders.size() + alive_in_flight(t.block) <
        st_.replication)
      mark_pending(t.block);
    start_next(src, now);
  }

  void on_snapshot(double now, std::uint64_t index) {
    tr_.events.push_back({now, EventKind::snapshot, 0, index});
    tr_.snapshots.push_back(take_snapshot(st_, now));
    push_if_due((index + 1) * cfg_.snapshot_period_days, kSnapshot, 0, index + 1);
  }

  const SimConfig& cfg_;
  Rng& rng_;
  SystemState st_;
  FailureClock clock_;
  LoadTable effective_;  // stored copies plus incoming transfers
  std::vector<std::vector<NodeId>> in_flight_;
  std::vector<std::uint8_t> pending_flag_;
  std::vector<BlockIndex> pending_;
  std::vector<std::deque<Transfer>> fifo_;
  std::vector<std::vector<BlockIndex>> rooted_work_;
  std::vector<std::vector<BlockIndex>> reassign_work_;
  std::vector<Slot> excluded_;
  double transfer_days_;
  double maintenance_days_;
  EventQueue queue_;
  EventTrace tr_;
};

}  // namespace detail

/// Simulates the detailed model with periodic maintenance and transfer
/// delays.
inline EventTrace run_detailed(const SimConfig& config, Rng& rng,
                               SystemState* final_state = nullptr) {
  detail::require_mode(config, Mode::detailed);
  detail::DetailedRun run(config, rng);
  return run.run(final_state);
}

inline EventTrace run(const SimConfig& config, Rng& rng,
                      SystemState* final_state = nullptr) {
  return config.mode == Mode::idealized ? run_idealized(config, rng, final_state)
                                        : run_detailed(config, rng, final_state);
}

struct CompensatorPoint {
  double time_days = 0.0;
  double value = 0.0;
};

/// Compensator of the copies received by the tagged node,
/// (1/(N-1)) * sum_{m != tagged} integral of L_m, with time measured in
/// mean lifetimes so that the slope approaches the average load. Loads are
/// integrated piecewise-constant between snapshots, so the error is of the
/// order of one snapshot period.
inline std::vector<CompensatorPoint> compensator_diagnostic(const EventTrace& tr) {
  if (tr.mode != Mode::idealized)
    throw UnsupportedError("compensator diagnostic needs an idealized trace");
  std::vector<CompensatorPoint> out;
  if (tr.snapshots.empty() || tr.n_nodes < 2) return out;
  const Slot tagged = tr.diagnostics.tagged;
  const double scale = 1.0 / ((tr.n_nodes - 1.0) * tr.mtbf_days);
  auto others = [&](const Snapshot& s) {
    double sum = 0.0;
    for (Slot i = 0; i < s.nodes.size(); ++i)
      if (i != tagged) sum += s.nodes[i].load;
    return sum;
  };
  double c = 0.0;
  out.push_back({tr.snapshots.front().time, 0.0});
  for (std::size_t k = 1; k < tr.snapshots.size(); ++k) {
    const auto& prev = tr.snapshots[k - 1];
    const auto& cur = tr.snapshots[k];
    c += others(prev) * scale * (cur.time - prev.time);
    out.push_back({cur.time, c});
  }
  return out;
}

}  // namespace placement_lab

#endif  // PLACEMENT_LAB_SIMULATOR_HPP
