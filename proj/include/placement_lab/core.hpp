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

// System state of a replicated block store: N node slots on an identifier
// ring, F* blocks with up to d copies each, and the per-node copy counts.

#ifndef PLACEMENT_LAB_CORE_HPP
#define PLACEMENT_LAB_CORE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "placement_lab/config.hpp"
#include "placement_lab/load_table.hpp"
#include "placement_lab/policies.hpp"

namespace placement_lab {

using BlockIndex = std::uint32_t;

/// A node incarnation. A slot is reused when its node fails; the generation
/// tells incarnations apart.
struct NodeId {
  Slot slot = 0;
  std::uint32_t generation = 0;
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

struct Node {
  std::uint64_t ring_position = 0;
  std::uint32_t generation = 0;
  double born_at_days = 0.0;
  friend bool operator==(const Node&, const Node&) = default;
};

struct Block {
  std::uint64_t id = 0;  // ring position
  std::vector<Slot> holders;
  NodeId root{};
  bool lost = false;
  friend bool operator==(const Block&, const Block&) = default;
};

struct SystemState {
  Mode mode = Mode::idealized;
  std::uint32_t replication = 1;
  std::vector<Node> nodes;
  LoadTable loads;
  std::vector<std::vector<BlockIndex>> node_blocks;
  std::vector<Block> blocks;
  std::uint64_t total_copies = 0;  // F_N = d * F*
  std::uint64_t lost_blocks = 0;

  std::size_t n_nodes() const { return nodes.size(); }

  NodeId id_of(Slot s) const { return {s, nodes[s].generation}; }
  bool alive(NodeId n) const { return nodes[n.slot].generation == n.generation; }

  std::uint64_t live_copies() const { return loads.total(); }

  double age_days(Slot s, double now) const { return now - nodes[s].born_at_days; }

  /// Holder whose ring position is the clockwise-nearest successor of the
  /// block id.
  Slot ring_successor_holder(const Block& b) const {
    Slot best = b.holders.front();
    std::uint64_t best_gap = std::numeric_limits<std::uint64_t>::max();
    for (Slot h : b.holders) {
      const std::uint64_t gap = nodes[h].ring_position - b.id;  // mod 2^64
      if (gap < best_gap || (gap == best_gap && h < best)) {
        best_gap = gap;
        best = h;
      }
    }
    return best;
  }

  void add_copy(BlockIndex b, Slot s) {
    blocks[b].holders.push_back(s);
    node_blocks[s].push_back(b);
    loads.increment(s);
  }

  /// Empties slot `s` and gives it a fresh ring position and generation.
  /// Holder lists of the blocks it held are left to the caller.
  void replace_node(Slot s, double now, Rng& rng) {
    auto& node = nodes[s];
    ring_in_use_.erase(node.ring_position);
    node.ring_position = draw_ring_position(rng);
    ++node.generation;
    node.born_at_days = now;
    node_blocks[s].clear();
    loads.reset(s);
  }

  std::uint64_t draw_ring_position(Rng& rng) {
    for (;;) {
      const std::uint64_t r = rng();
      if (ring_in_use_.insert(r).second) return r;
    }
  }

 private:
  std::unordered_set<std::uint64_t> ring_in_use_;
};

/// Initial placement of d copies for each of the F* blocks.
///
/// The optimal bootstrap deals copies round-robin over a random permutation
/// of the slots, so every load lies in {ceil(F/N)-1, ceil(F/N)} and a
/// block's copies land on d consecutive (hence distinct) slots of the
/// permutation. The policy bootstrap places blocks one at a time with the
/// configured selection rule. Roots are assigned in detailed mode only.
inline SystemState place_initial(const SimConfig& config, Rng& rng) {
  config.validate();
  const std::uint32_t n = config.n_nodes;
  const std::uint32_t d = config.replication;

  SystemState st;
  st.mode = config.mode;
  st.replication = d;
  st.total_copies = config.total_copies();
  st.nodes.resize(n);
  st.node_blocks.resize(n);
  st.loads = LoadTable(n);
  for (auto& node : st.nodes) node.ring_position = st.draw_ring_position(rng);

  st.blocks.resize(config.n_blocks);
  std::unordered_set<std::uint64_t> block_ids;
  block_ids.reserve(config.n_blocks * 2);
  for (auto& b : st.blocks) {
    do b.id = rng();
    while (!block_ids.insert(b.id).second);
    b.holders.reserve(d);
  }

  if (config.effective_bootstrap() == Bootstrap::optimal) {
    std::vector<Slot> perm(n);
    std::iota(perm.begin(), perm.end(), Slot{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uint64_t k = 0;
    for (BlockIndex b = 0; b < st.blocks.size(); ++b)
      for (std::uint32_t j = 0; j < d; ++j) st.add_copy(b, perm[k++ % n]);
  } else {
    for (BlockIndex b = 0; b < st.blocks.size(); ++b)
      for (std::uint32_t j = 0; j < d; ++j)
        st.add_copy(b, select(config.policy, st.loads, st.blocks[b].holders, rng));
  }

  if (st.mode == Mode::detailed)
    for (auto& b : st.blocks) b.root = st.id_of(st.ring_successor_holder(b));
  return st;
}

struct Violation {
  std::string kind;
  std::string detail;
};

/// Checks every state invariant; an empty result means the state is sound.
inline std::vector<Violation> verify_state(const SystemState& st) {
  std::vector<Violation> out;
  const auto n = st.n_nodes();

  {
    std::unordered_set<std::uint64_t> seen;
    for (Slot s = 0; s < n; ++s)
      if (!seen.insert(st.nodes[s].ring_position).second)
        out.push_back({"ring collision", "slot " + std::to_string(s)});
  }

  if (st.loads.size() != n || st.node_blocks.size() != n) {
    out.push_back({"shape", "per-slot arrays disagree with node count"});
    return out;
  }

  for (Slot s = 0; s < n; ++s)
    if (st.loads[s] != st.node_blocks[s].size())
      out.push_back({"load mismatch", "slot " + std::to_string(s)});

  std::uint64_t held = 0;
  std::vector<std::uint32_t> expected_load(n, 0);
  for (BlockIndex b = 0; b < st.blocks.size(); ++b) {
    const auto& blk = st.blocks[b];
    const auto where = "block " + std::to_string(b);
    held += blk.holders.size();
    auto sorted = blk.holders;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      out.push_back({"duplicate holder", where});
    bool in_range = true;
    for (Slot h : blk.holders) {
      if (h >= n) in_range = false;
      else ++expected_load[h];
    }
    if (!in_range) out.push_back({"holder out of range", where});
    if (blk.lost) {
      if (!blk.holders.empty()) out.push_back({"lost block has copies", where});
      continue;
    }
    if (blk.holders.empty() || blk.holders.size() > st.replication)
      out.push_back({"replica count", where});
    else if (st.mode == Mode::idealized && blk.holders.size() != st.replication)
      out.push_back({"replica count", where});
    if (st.mode == Mode::detailed && blk.root.slot < n && st.alive(blk.root) &&
        std::find(blk.holders.begin(), blk.holders.end(), blk.root.slot) ==
            blk.holders.end())
      out.push_back({"root not a holder", where});
  }

  for (Slot s = 0; s < n; ++s)
    if (expected_load[s] != st.node_blocks[s].size())
      out.push_back({"holder index", "slot " + std::to_string(s)});

  const std::uint64_t sum = st.loads.total();
  if (st.mode == Mode::idealized) {
    if (sum != st.total_copies)
      out.push_back({"conservation", "sum of loads " + std::to_string(sum) +
                                         " != F_N " +
                                         std::to_string(st.total_copies)});
  } else {
    if (sum != held)
      out.push_back({"conservation", "sum of loads " + std::to_string(sum) +
                                         " != live copies " + std::to_string(held)});
    if (sum > st.total_copies)
      out.push_back({"conservation", "more copies than d * F*"});
  }
  return out;
}

}  // namespace placement_lab

#endif  // PLACEMENT_LAB_CORE_HPP
