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
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "placement_lab/policies.hpp"

namespace pl = placement_lab;
using pl::PolicyKind;

namespace {

constexpr PolicyKind kAll[] = {PolicyKind::random, PolicyKind::least_loaded,
                               PolicyKind::power_of_choice};

std::vector<std::uint64_t> frequencies(PolicyKind policy, const pl::LoadTable& loads,
                                       const std::vector<pl::Slot>& excluded, int draws,
                                       std::uint64_t seed) {
  pl::Rng rng(seed);
  std::vector<std::uint64_t> f(loads.size(), 0);
  for (int i = 0; i < draws; ++i) ++f[pl::select(policy, loads, excluded, rng)];
  return f;
}

std::vector<bool> mask(std::size_t n, const std::vector<pl::Slot>& excluded) {
  std::vector<bool> m(n, false);
  for (auto e : excluded) m[e] = true;
  return m;
}

}  // namespace

TEST(SelectRandom, SingleCandidate) {
  pl::LoadTable loads(std::vector<std::uint32_t>(6, 0));
  pl::Rng rng(1);
  for (int i = 0; i < 100; ++i)
    EXPECT_EQ(pl::select_random(loads, std::vector<pl::Slot>{0, 1, 2, 3, 4}, rng), 5u);
}

TEST(SelectRandom, ThreeNodesOneExcludedIsFair) {
  pl::LoadTable loads(std::vector<std::uint32_t>{4, 0, 9});
  const auto f = frequencies(PolicyKind::random, loads, {0}, 100000, 2);
  EXPECT_EQ(f[0], 0u);
  const auto cs = oracle::chi_square(f, {0.0, 0.5, 0.5});
  EXPECT_GT(cs.p_value, 0.001);
}

TEST(Policies, AllExcludedIsSelectionError) {
  pl::LoadTable loads(std::vector<std::uint32_t>{1, 2, 3});
  pl::Rng rng(3);
  for (auto p : kAll)
    EXPECT_THROW(pl::select(p, loads, std::vector<pl::Slot>{0, 1, 2}, rng), pl::SelectionError);
}

TEST(SelectLeastLoaded, UniqueMinimum) {
  pl::LoadTable loads(std::vector<std::uint32_t>{3, 1, 7});
  pl::Rng rng(4);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(pl::select_least_loaded(loads, {}, rng), 1u);
}

TEST(SelectLeastLoaded, TiesSplitEvenly) {
  pl::LoadTable loads(std::vector<std::uint32_t>{2, 2, 5});
  const auto f = frequencies(PolicyKind::least_loaded, loads, {}, 100000, 5);
  EXPECT_EQ(f[2], 0u);
  EXPECT_GT(oracle::chi_square(f, {0.5, 0.5, 0.0}).p_value, 0.001);
}

TEST(SelectLeastLoaded, SkipsExcludedMinimum) {
  pl::LoadTable loads(std::vector<std::uint32_t>{0, 4, 2, 2});
  pl::Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const auto s = pl::select_least_loaded(loads, std::vector<pl::Slot>{0, 2}, rng);
    EXPECT_EQ(s, 3u);
  }
}

TEST(SelectPowerOfChoice, TwoEligibleForcedComparison) {
  pl::LoadTable loads(std::vector<std::uint32_t>{2, 9, 0});
  pl::Rng rng(7);
  for (int i = 0; i < 200; ++i)
    EXPECT_EQ(pl::select_power_of_choice(loads, std::vector<pl::Slot>{2}, rng), 0u);
}

TEST(SelectPowerOfChoice, ThreeEligibleMatchesPairEnumeration) {
  // Pairs {a,b}->a, {a,c}->a, {b,c}->b, each with probability 1/3.
  pl::LoadTable loads(std::vector<std::uint32_t>{0, 1, 2});
  const std::vector<double> exact{2.0 / 3, 1.0 / 3, 0.0};
  const auto law = oracle::selection_law(PolicyKind::power_of_choice, {0, 1, 2},
                                         {false, false, false});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(law[i], exact[i], 1e-15);
  const auto f = frequencies(PolicyKind::power_of_choice, loads, {}, 100000, 8);
  const auto cs = oracle::chi_square(f, exact);
  EXPECT_FALSE(cs.impossible_hit);
  EXPECT_GT(cs.p_value, 0.001);
}

TEST(SelectPowerOfChoice, EqualLoadsFairCoin) {
  pl::LoadTable loads(std::vector<std::uint32_t>{5, 5});
  const auto f = frequencies(PolicyKind::power_of_choice, loads, {}, 100000, 9);
  EXPECT_GT(oracle::chi_square(f, {0.5, 0.5}).p_value, 0.001);
}

TEST(SelectPowerOfChoice, SingleEligibleIsReturned) {
  pl::LoadTable loads(std::vector<std::uint32_t>{5, 1, 3});
  pl::Rng rng(10);
  EXPECT_EQ(pl::select_power_of_choice(loads, std::vector<pl::Slot>{1, 2}, rng), 0u);
}

// Exclusion holds for every policy on random states, including duplicate and
// out-of-range entries in the exclusion list.
TEST(PolicyProperties, NeverReturnsExcluded) {
  pl::Rng gen(11);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t n = 1 + gen() % 12;
    std::vector<std::uint32_t> raw(n);
    for (auto& v : raw) v = gen() % 6;
    pl::LoadTable loads(raw);
    std::vector<pl::Slot> excluded;
    const auto k = gen() % n;
    for (std::size_t i = 0; i < k; ++i) excluded.push_back(static_cast<pl::Slot>(gen() % (n + 2)));
    const auto m = mask(n + 2, excluded);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) any |= !m[i];
    for (auto p : kAll) {
      if (!any) {
        EXPECT_THROW(pl::select(p, loads, excluded, gen), pl::SelectionError);
        continue;
      }
      const auto s = pl::select(p, loads, excluded, gen);
      ASSERT_LT(s, n);
      ASSERT_FALSE(m[s]);
    }
  }
}

// Least loaded returns a minimal-load node. Power of choice returns the
// lighter node of its pair, so a unique heaviest node is never picked.
TEST(PolicyProperties, LoadOrderingGuarantees) {
  pl::Rng gen(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + gen() % 10;
    std::vector<std::uint32_t> raw(n);
    for (auto& v : raw) v = gen() % 8;
    pl::LoadTable loads(raw);
    std::vector<pl::Slot> excluded{static_cast<pl::Slot>(gen() % n)};
    const auto m = mask(n, excluded);
    std::uint32_t lo = UINT32_MAX, hi = 0;
    std::size_t at_hi = 0, eligible = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!m[i]) { lo = std::min(lo, raw[i]); hi = std::max(hi, raw[i]); ++eligible; }
    for (std::size_t i = 0; i < n; ++i) at_hi += !m[i] && raw[i] == hi;
    const auto ll = pl::select_least_loaded(loads, excluded, gen);
    ASSERT_EQ(raw[ll], lo);
    const auto pc = pl::select_power_of_choice(loads, excluded, gen);
    if (eligible >= 2 && at_hi == 1 && hi > lo) {
      ASSERT_NE(raw[pc], hi);
    }
  }
}

// Empirical frequencies against the enumerated law on every small instance
// shape: up to 5 eligible nodes, random loads with ties, random exclusions.
TEST(PolicyProperties, FrequenciesMatchEnumeratedLawOnSmallInstances) {
  pl::Rng gen(13);
  int checked = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t n = 1 + gen() % 7;
    std::vector<std::uint32_t> raw(n);
    for (auto& v : raw) v = gen() % 4;
    std::vector<pl::Slot> excluded;
    for (pl::Slot i = 0; i < n; ++i)
      if (gen() % 3 == 0) excluded.push_back(i);
    const auto m = mask(n, excluded);
    const auto eligible = std::count(m.begin(), m.end(), false);
    if (eligible == 0 || eligible > 5) continue;
    pl::LoadTable loads(raw);
    for (auto p : kAll) {
      const auto law = oracle::selection_law(p, raw, m);
      const auto f = frequencies(p, loads, excluded, 100000, 1000 + trial);
      const auto cs = oracle::chi_square(f, law);
      EXPECT_FALSE(cs.impossible_hit) << to_string(p) << " trial " << trial;
      EXPECT_GT(cs.p_value, 0.001) << to_string(p) << " trial " << trial;
      ++checked;
    }
  }
  EXPECT_GT(checked, 30);
}
