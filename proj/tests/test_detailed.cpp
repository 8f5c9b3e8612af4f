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

#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "placement_lab/simulator.hpp"

namespace pl = placement_lab;
using pl::PolicyKind;

namespace {

pl::SimConfig detailed(std::uint32_t n, std::uint32_t blocks, PolicyKind policy,
                       double horizon_days) {
  pl::SimConfig c;
  c.mode = pl::Mode::detailed;
  c.n_nodes = n;
  c.n_blocks = blocks;
  c.policy = policy;
  c.horizon_days = horizon_days;
  return c;
}

std::uint64_t snapshot_total(const pl::Snapshot& s) {
  std::uint64_t t = 0;
  for (const auto& n : s.nodes) t += n.load;
  return t;
}

std::uint64_t destroyed_copies(const pl::EventTrace& tr) {
  std::uint64_t t = 0;
  for (const auto& e : tr.events)
    if (e.kind == pl::EventKind::failure) t += e.value;
  return t;
}

}  // namespace

TEST(Detailed, TransferDurationFromLinkParameters) {
  pl::SimConfig c;
  EXPECT_NEAR(c.transfer_seconds(), 0.1 + 80.0 / 5.5, 1e-12);
  EXPECT_NEAR(c.transfer_seconds(), 14.65, 0.01);
}

TEST(Detailed, RejectsIdealizedMode) {
  auto c = detailed(20, 50, PolicyKind::random, 1);
  c.mode = pl::Mode::idealized;
  pl::Rng rng(1);
  EXPECT_THROW(pl::run_detailed(c, rng), pl::ConfigError);
}

TEST(Detailed, WithoutMaintenanceCopiesOnlyDisappear) {
  auto c = detailed(40, 300, PolicyKind::power_of_choice, 30.0);
  c.maintenance_period_hours = 1e6;
  pl::Rng rng(2);
  pl::SystemState fin;
  const auto tr = pl::run_detailed(c, rng, &fin);
  EXPECT_GT(tr.failures, 0u);
  EXPECT_EQ(tr.transfers_enqueued, 0u);
  EXPECT_EQ(tr.copies_placed, 0u);
  for (const auto& e : tr.events) EXPECT_NE(e.kind, pl::EventKind::repair_batch);
  for (std::size_t k = 1; k < tr.snapshots.size(); ++k)
    EXPECT_LE(snapshot_total(tr.snapshots[k]), snapshot_total(tr.snapshots[k - 1]));
  EXPECT_EQ(fin.loads.total(), c.total_copies() - destroyed_copies(tr));
  EXPECT_GT(tr.lost_blocks, 0u);
  EXPECT_TRUE(pl::verify_state(fin).empty());
}

TEST(Detailed, RepairsRunOnlyOnMaintenanceTicks) {
  auto c = detailed(60, 600, PolicyKind::least_loaded, 20.0);
  c.maintenance_period_hours = 3.0;
  pl::Rng rng(3);
  const auto tr = pl::run_detailed(c, rng);
  std::size_t batches = 0;
  for (const auto& e : tr.events) {
    if (e.kind != pl::EventKind::repair_batch) continue;
    ++batches;
    const double ticks = e.time / (3.0 / 24.0);
    EXPECT_NEAR(ticks, std::round(ticks), 1e-9);
    EXPECT_GT(e.value, 0u);
  }
  EXPECT_GT(batches, 0u);
}

// Held copies are the initial ones, minus those on failed nodes, plus
// completed transfers; and no snapshot exceeds the copies that can exist given
// the losses so far.
TEST(Detailed, CopyAccounting) {
  for (auto policy : {PolicyKind::random, PolicyKind::least_loaded, PolicyKind::power_of_choice}) {
    auto c = detailed(30, 400, policy, 60.0);
    c.mtbf_days = 1.0;  // frequent failures, some losses
    c.maintenance_period_hours = 6.0;
    pl::Rng rng(4);
    pl::SystemState fin;
    const auto tr = pl::run_detailed(c, rng, &fin);
    EXPECT_EQ(fin.loads.total() + destroyed_copies(tr), c.total_copies() + tr.copies_placed);
    EXPECT_LE(tr.copies_placed + tr.transfers_dropped, tr.transfers_enqueued);

    std::uint64_t lost = 0;
    std::size_t e = 0;
    for (const auto& snap : tr.snapshots) {
      for (; e < tr.events.size() && tr.events[e].time <= snap.time; ++e)
        lost += tr.events[e].kind == pl::EventKind::block_lost;
      EXPECT_LE(snapshot_total(snap) + c.replication * lost, c.total_copies());
    }
    EXPECT_EQ(lost, tr.lost_blocks);
    EXPECT_EQ(fin.lost_blocks, tr.lost_blocks);

    const auto v = pl::verify_state(fin);
    EXPECT_TRUE(v.empty()) << v.front().kind << " " << v.front().detail;
  }
}

TEST(Detailed, LostBlocksAreReportedOnceAndStayEmpty) {
  auto c = detailed(20, 200, PolicyKind::random, 40.0);
  c.mtbf_days = 0.5;
  c.maintenance_period_hours = 12.0;
  pl::Rng rng(5);
  pl::SystemState fin;
  const auto tr = pl::run_detailed(c, rng, &fin);
  std::set<std::uint64_t> seen;
  for (const auto& e : tr.events) {
    if (e.kind != pl::EventKind::block_lost) continue;
    EXPECT_TRUE(seen.insert(e.value).second);
    EXPECT_TRUE(fin.blocks[e.value].lost);
    EXPECT_TRUE(fin.blocks[e.value].holders.empty());
  }
  EXPECT_EQ(seen.size(), tr.lost_blocks);
  EXPECT_GT(tr.lost_blocks, 0u);
}

TEST(Detailed, ShortOutagesAreRepairedToFullReplication) {
  // Failures are rare relative to the tick, so at the end almost every block
  // should be back at d copies.
  auto c = detailed(100, 1000, PolicyKind::power_of_choice, 10.0);
  c.maintenance_period_hours = 0.5;
  pl::Rng rng(6);
  pl::SystemState fin;
  const auto tr = pl::run_detailed(c, rng, &fin);
  EXPECT_GT(tr.copies_placed, 0u);
  std::size_t short_blocks = 0;
  for (const auto& b : fin.blocks) short_blocks += !b.lost && b.holders.size() < 3;
  EXPECT_LT(short_blocks, 20u);
  EXPECT_EQ(tr.lost_blocks, 0u);
}

TEST(Detailed, DeterministicUnderFixedSeed) {
  for (auto policy : {PolicyKind::random, PolicyKind::least_loaded, PolicyKind::power_of_choice}) {
    auto c = detailed(40, 500, policy, 30.0);
    c.mtbf_days = 2.0;
    pl::Rng a(7), b(7), other(8);
    const auto ta = pl::run_detailed(c, a);
    const auto tb = pl::run_detailed(c, b);
    EXPECT_TRUE(ta == tb);
    EXPECT_FALSE(ta == pl::run_detailed(c, other));
  }
}

TEST(Detailed, ZeroHorizonIsTheInitialPlacement) {
  auto c = detailed(20, 100, PolicyKind::least_loaded, 0.0);
  pl::Rng rng(9), twin(9);
  const auto tr = pl::run_detailed(c, rng);
  const auto st = pl::place_initial(c, twin);
  ASSERT_EQ(tr.snapshots.size(), 1u);
  for (pl::Slot s = 0; s < c.n_nodes; ++s) EXPECT_EQ(tr.snapshots[0].nodes[s].load, st.loads[s]);
  EXPECT_EQ(tr.failures, 0u);
}

TEST(Detailed, ReferenceScaleLossesAreRare) {
  const auto c = detailed(200, 10000, PolicyKind::power_of_choice, 729.0);
  pl::Rng rng(10);
  pl::SystemState fin;
  const auto tr = pl::run_detailed(c, rng, &fin);
  EXPECT_LT(tr.lost_blocks, 100u);
  EXPECT_TRUE(pl::verify_state(fin).empty());
}
