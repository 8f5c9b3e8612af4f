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

#ifndef PLACEMENT_LAB_STATS_HPP
#define PLACEMENT_LAB_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "placement_lab/config.hpp"
#include "placement_lab/meanfield.hpp"
#include "placement_lab/simulator.hpp"

namespace placement_lab {

/// Histogram of integer loads.
struct EmpiricalDistribution {
  std::vector<std::uint64_t> counts;
  std::uint64_t samples = 0;
  std::vector<std::uint64_t> run_ids;
  std::vector<double> snapshot_times;

  void add(std::uint32_t load) {
    if (load >= counts.size()) counts.resize(load + 1, 0);
    ++counts[load];
    ++samples;
  }

  std::size_t max_value() const { return counts.empty() ? 0 : counts.size() - 1; }

  double pmf(std::size_t x) const {
    return x < counts.size() ? static_cast<double>(counts[x]) / samples : 0.0;
  }

  /// P(X <= x).
  double cdf(std::size_t x) const {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i <= x && i < counts.size(); ++i) c += counts[i];
    return static_cast<double>(c) / samples;
  }

  /// P(X <= x) for x = 0..max_value().
  std::vector<double> cdf_table() const {
    std::vector<double> out(counts.size());
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      c += counts[i];
      out[i] = static_cast<double>(c) / samples;
    }
    return out;
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) m += static_cast<double>(i) * counts[i];
    return m / samples;
  }
};

inline EmpiricalDistribution empirical_cdf(std::span<const std::uint32_t> loads) {
  if (loads.empty()) throw DomainError("empirical_cdf: empty sample");
  EmpiricalDistribution out;
  for (auto l : loads) out.add(l);
  return out;
}

/// Discards the first max(100 days, 10 mean lifetimes).
inline double default_warmup_days(double mtbf_days) {
  return std::max(100.0, 10.0 * mtbf_days);
}

/// Pools the per-node loads of every snapshot taken at or after `warmup_days`.
inline EmpiricalDistribution stationary_distribution(std::span<const EventTrace> traces,
                                                     double warmup_days) {
  EmpiricalDistribution out;
  for (std::size_t r = 0; r < traces.size(); ++r) {
    for (const auto& snap : traces[r].snapshots) {
      if (snap.time < warmup_days) continue;
      for (const auto& n : snap.nodes) out.add(n.load);
      out.run_ids.push_back(r);
      out.snapshot_times.push_back(snap.time);
    }
  }
  if (out.samples == 0) throw DomainError("no snapshots after warmup");
  return out;
}

/// Pools the loads of the last snapshot of every trace.
inline EmpiricalDistribution final_distribution(std::span<const EventTrace> traces) {
  EmpiricalDistribution out;
  for (std::size_t r = 0; r < traces.size(); ++r) {
    if (traces[r].snapshots.empty()) continue;
    const auto& snap = traces[r].snapshots.back();
    for (const auto& n : snap.nodes) out.add(n.load);
    out.run_ids.push_back(r);
    out.snapshot_times.push_back(snap.time);
  }
  if (out.samples == 0) throw DomainError("no snapshots");
  return out;
}

/// sup over integers x of |F_emp(x) - (1 - xi(x+1))|.
inline double ks_distance(const EmpiricalDistribution& emp, const TailVector& model) {
  const std::size_t top = std::max(emp.max_value(), model.x_max()) + 1;
  double sup = 0.0;
  std::uint64_t c = 0;
  for (std::size_t x = 0; x <= top; ++x) {
    if (x < emp.counts.size()) c += emp.counts[x];
    const double fe = static_cast<double>(c) / emp.samples;
    sup = std::max(sup, std::abs(fe - model.cdf(x)));
  }
  return sup;
}

struct FitReport {
  double ks_distance = 0.0;
  double mean_gap = 0.0;
  std::uint64_t samples = 0;
  std::string model;
};

inline FitReport fit(const EmpiricalDistribution& emp, const TailVector& model,
                     std::string model_id) {
  return {ks_distance(emp, model), std::abs(emp.mean() - model.mean()), emp.samples,
          std::move(model_id)};
}

struct AgeBin {
  double age_days = 0.0;  // lower edge
  double mean_load = 0.0;
  std::uint64_t samples = 0;
};

/// Mean load per age bin over all snapshot entries at or after
/// `warmup_days`. Empty bins are omitted.
inline std::vector<AgeBin> load_vs_age(std::span<const EventTrace> traces,
                                       double bin_days = 1.0, double warmup_days = 0.0) {
  if (!(bin_days > 0.0)) throw DomainError("bin width must be > 0");
  std::vector<double> sum;
  std::vector<std::uint64_t> count;
  for (const auto& tr : traces) {
    for (const auto& snap : tr.snapshots) {
      if (snap.time < warmup_days) continue;
      for (const auto& n : snap.nodes) {
        const auto bin = static_cast<std::size_t>(std::floor(n.age_days / bin_days));
        if (bin >= sum.size()) {
          sum.resize(bin + 1, 0.0);
          count.resize(bin + 1, 0);
        }
        sum[bin] += n.load;
        ++count[bin];
      }
    }
  }
  std::vector<AgeBin> out;
  for (std::size_t b = 0; b < sum.size(); ++b)
    if (count[b] > 0) out.push_back({b * bin_days, sum[b] / count[b], count[b]});
  return out;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of mean load on bin midpoint, over bins with at
/// least `min_samples` entries.
inline LinearFit fit_age_load(std::span<const AgeBin> bins, double bin_days,
                              std::uint64_t min_samples = 1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t n = 0;
  for (const auto& b : bins) {
    if (b.samples < min_samples) continue;
    const double x = b.age_days + 0.5 * bin_days;
    const double y = b.mean_load;
    sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
    ++n;
  }
  LinearFit f;
  f.points = n;
  if (n < 2) return f;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = vy > 0 ? (cxy * cxy) / (vx * vy) : 1.0;
  return f;
}

struct MaxLoadStats {
  double mean_of_max = 0.0;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  std::uint64_t samples = 0;
};

/// Statistics of the per-sample maximal load, sampling every
/// `sample_period_days` from `warmup_days` on in every trace.
inline MaxLoadStats max_load_stats(std::span<const EventTrace> traces, double warmup_days,
                                   double sample_period_days) {
  if (!(sample_period_days > 0.0)) throw DomainError("sample period must be > 0");
  MaxLoadStats s;
  s.min = std::numeric_limits<std::uint32_t>::max();
  double total = 0.0;
  for (const auto& tr : traces) {
    double next = warmup_days;
    for (const auto& snap : tr.snapshots) {
      // Tolerate snapshot times that are accumulated multiples of the period.
      if (snap.time + 1e-9 < next || snap.nodes.empty()) continue;
      std::uint32_t m = 0;
      for (const auto& n : snap.nodes) m = std::max(m, n.load);
      total += m;
      s.min = std::min(s.min, m);
      s.max = std::max(s.max, m);
      ++s.samples;
      while (next <= snap.time + 1e-9) next += sample_period_days;
    }
  }
  if (s.samples == 0) throw DomainError("no samples after warmup");
  s.mean_of_max = total / s.samples;
  return s;
}

}  // namespace placement_lab

#endif  // PLACEMENT_LAB_STATS_HPP
