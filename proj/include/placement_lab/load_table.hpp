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

#ifndef PLACEMENT_LAB_LOAD_TABLE_HPP
#define PLACEMENT_LAB_LOAD_TABLE_HPP

#include <cassert>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace placement_lab {

using Slot = std::uint32_t;

/// Per-slot copy counts, bucketed by value so that the minimum-load bucket
/// is available in O(1). All updates are O(1) amortized.
class LoadTable {
 public:
  LoadTable() = default;
  explicit LoadTable(std::size_t n) : LoadTable(std::vector<std::uint32_t>(n, 0)) {}
  explicit LoadTable(std::vector<std::uint32_t> loads) : load_(std::move(loads)) {
    pos_.resize(load_.size());
    for (Slot s = 0; s < load_.size(); ++s) insert(s);
    min_ = 0;
    settle_min();
  }

  std::size_t size() const noexcept { return load_.size(); }
  std::uint32_t operator[](Slot s) const { return load_[s]; }
  std::span<const std::uint32_t> values() const noexcept { return load_; }

  std::uint64_t total() const {
    return std::accumulate(load_.begin(), load_.end(), std::uint64_t{0});
  }

  std::uint32_t min_load() const noexcept { return min_; }

  /// Slots whose load equals `value`, in unspecified but deterministic order.
  std::span<const Slot> bucket(std::uint32_t value) const {
    if (value >= buckets_.size()) return {};
    return buckets_[value];
  }

  void increment(Slot s) { set(s, load_[s] + 1); }
  void decrement(Slot s) {
    assert(load_[s] > 0);
    set(s, load_[s] - 1);
  }
  void reset(Slot s) { set(s, 0); }

  void set(Slot s, std::uint32_t value) {
    if (value == load_[s]) return;
    erase(s);
    load_[s] = value;
    insert(s);
    if (value < min_) min_ = value;
    settle_min();
  }

  friend bool operator==(const LoadTable& a, const LoadTable& b) {
    return a.load_ == b.load_;
  }

 private:
  void insert(Slot s) {
    const auto v = load_[s];
    if (v >= buckets_.size()) buckets_.resize(v + 1);
    pos_[s] = static_cast<std::uint32_t>(buckets_[v].size());
    buckets_[v].push_back(s);
  }

  void erase(Slot s) {
    auto& b = buckets_[load_[s]];
    const auto p = pos_[s];
    b[p] = b.back();
    pos_[b[p]] = p;
    b.pop_back();
  }

  void settle_min() {
    if (load_.empty()) return;
    while (buckets_[min_].empty()) ++min_;
  }

  std::vector<std::uint32_t> load_;
  std::vector<std::uint32_t> pos_;
  std::vector<std::vector<Slot>> buckets_;
  std::uint32_t min_ = 0;
};

}  // namespace placement_lab

#endif  // PLACEMENT_LAB_LOAD_TABLE_HPP
