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

// Placement selection rules. Each picks the destination slot of one new copy
// among all slots not listed in `excluded` (the block's current holders and
// pending destinations). The selection range is the whole node set.

#ifndef PLACEMENT_LAB_POLICIES_HPP
#define PLACEMENT_LAB_POLICIES_HPP

#include <algorithm>
#include <random>
#include <span>
#include <vector>

#include "placement_lab/config.hpp"
#include "placement_lab/load_table.hpp"

namespace placement_lab {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

// Sorted, deduplicated, in-range exclusions; maps the k-th eligible index to
// its slot.
class Eligible {
 public:
  Eligible(std::size_t n, std::span<const Slot> excluded)
      : n_(n), excluded_(excluded.begin(), excluded.end()) {
    std::sort(excluded_.begin(), excluded_.end());
    excluded_.erase(std::unique(excluded_.begin(), excluded_.end()),
                    excluded_.end());
    while (!excluded_.empty() && excluded_.back() >= n_) excluded_.pop_back();
  }

  std::size_t count() const { return n_ - excluded_.size(); }

  Slot nth(std::uint64_t k) const {
    for (Slot e : excluded_) {
      if (e <= k) ++k;
      else break;
    }
    return static_cast<Slot>(k);
  }

  bool contains(Slot s) const {
    return s < n_ && !std::binary_search(excluded_.begin(), excluded_.end(), s);
  }

  std::span<const Slot> excluded() const { return excluded_; }

 private:
  std::size_t n_;
  std::vector<Slot> excluded_;
};

}  // namespace detail

/// Uniform over eligible slots.
inline Slot select_random(const LoadTable& loads, std::span<const Slot> excluded,
                          Rng& rng) {
  const detail::Eligible eligible(loads.size(), excluded);
  if (eligible.count() == 0) throw SelectionError("random: no eligible node");
  return eligible.nth(detail::uniform_below(rng, eligible.count()));
}

/// A slot of minimal load among eligible slots; ties broken uniformly.
inline Slot select_least_loaded(const LoadTable& loads,
                                std::span<const Slot> excluded, Rng& rng) {
  const detail::Eligible eligible(loads.size(), excluded);
  if (eligible.count() == 0)
    throw SelectionError("least_loaded: no eligible node");
  for (std::uint32_t value = loads.min_load();; ++value) {
    const auto bucket = loads.bucket(value);
    std::size_t blocked = 0;
    for (Slot e : eligible.excluded())
      if (loads[e] == value) ++blocked;
    if (bucket.size() == blocked) continue;
    // Rejection sampling is uniform over the eligible members of the bucket.
    for (;;) {
      const Slot s = bucket[detail::uniform_below(rng, bucket.size())];
      if (eligible.contains(s)) return s;
    }
  }
}

/// Samples an unordered pair of distinct eligible slots uniformly and returns
/// the less loaded one, a fair coin deciding equal loads. With a single
/// eligible slot that slot is returned.
inline Slot select_power_of_choice(const LoadTable& loads,
                                   std::span<const Slot> excluded, Rng& rng) {
  const detail::Eligible eligible(loads.size(), excluded);
  const auto m = eligible.count();
  if (m == 0) throw SelectionError("power_of_choice: no eligible node");
  if (m == 1) return eligible.nth(0);
  const auto i = detail::uniform_below(rng, m);
  auto j = detail::uniform_below(rng, m - 1);
  if (j >= i) ++j;
  const Slot a = eligible.nth(i);
  const Slot b = eligible.nth(j);
  if (loads[a] < loads[b]) return a;
  if (loads[b] < loads[a]) return b;
  return std::bernoulli_distribution(0.5)(rng) ? b : a;
}

inline Slot select(PolicyKind policy, const LoadTable& loads,
                   std::span<const Slot> excluded, Rng& rng) {
  switch (policy) {
    case PolicyKind::random: return select_random(loads, excluded, rng);
    case PolicyKind::least_loaded:
      return select_least_loaded(loads, excluded, rng);
    case PolicyKind::power_of_choice:
      return select_power_of_choice(loads, excluded, rng);
  }
  throw UnsupportedError("unknown policy");
}

}  // namespace placement_lab

#endif  // PLACEMENT_LAB_POLICIES_HPP
