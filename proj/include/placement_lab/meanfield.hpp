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

// Large-N limit laws of the load of a single node.
//
// Random placement: the load is a jump process that grows by one at rate
// beta and resets to zero at rate one; its equilibrium is geometric,
// P(X >= n) = (beta / (1 + beta))^n.
//
// Power of choice: the tail xi(x) = P(X >= x) of the equilibrium satisfies
// xi(x+1) = beta * (xi(x)^2 - xi(x+1)^2), xi(0) = 1, and the transient tail
// F(t, x) follows dF(x)/dt = beta * (F(x-1)^2 - F(x)^2) - F(x).
//
// Time is measured in mean node lifetimes.

#ifndef PLACEMENT_LAB_MEANFIELD_HPP
#define PLACEMENT_LAB_MEANFIELD_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "placement_lab/config.hpp"
#include "placement_lab/policies.hpp"

namespace placement_lab {

inline constexpr double kTailTolerance = 1e-12;

/// Discrete tail distribution xi(x) = P(X >= x) on {0, ..., x_max}; values
/// past x_max are taken as zero.
struct TailVector {
  double beta = 0.0;
  std::vector<double> tail;

  std::size_t x_max() const { return tail.empty() ? 0 : tail.size() - 1; }

  double at(std::size_t x) const { return x < tail.size() ? tail[x] : 0.0; }
  double pmf(std::size_t x) const { return at(x) - at(x + 1); }
  double cdf(std::size_t x) const { return 1.0 - at(x + 1); }

  /// E[X] = sum_{x >= 1} xi(x).
  double mean() const {
    double m = 0.0;
    // Smallest terms first.
    for (std::size_t x = tail.size(); x-- > 1;) m += tail[x];
    return m;
  }

  bool valid(double eps = 1e-12) const {
    if (tail.empty() || std::abs(tail[0] - 1.0) > eps) return false;
    for (std::size_t x = 0; x < tail.size(); ++x) {
      if (!(tail[x] >= -eps && tail[x] <= 1.0 + eps)) return false;
      if (x > 0 && tail[x] > tail[x - 1] + eps) return false;
    }
    return true;
  }
};

inline void require_positive_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw DomainError("beta must be a positive finite number");
}

/// Geometric equilibrium of the random policy. Without `x_max` the vector is
/// truncated at the first index whose tail drops below 1e-12.
inline TailVector random_invariant_tail(double beta,
                                        std::optional<std::size_t> x_max = {}) {
  require_positive_beta(beta);
  const double ratio = beta / (1.0 + beta);
  std::size_t last = 0;
  if (x_max) {
    last = *x_max;
  } else {
    last = static_cast<std::size_t>(std::ceil(std::log(kTailTolerance) / std::log(ratio)));
    while (std::pow(ratio, static_cast<double>(last)) >= kTailTolerance) ++last;
  }
  TailVector out{beta, std::vector<double>(last + 1)};
  const double log_ratio = std::log(ratio);
  for (std::size_t n = 0; n <= last; ++n)
    out.tail[n] = std::exp(static_cast<double>(n) * log_ratio);
  return out;
}

/// One step of the power-of-choice recursion, written as
/// 2*beta*xi^2 / (1 + sqrt(1 + 4*beta^2*xi^2)) so the far tail keeps its
/// relative precision.
inline double poc_tail_step(double beta, double xi) {
  const double bx = beta * xi;
  return 2.0 * bx * xi / (1.0 + std::sqrt(1.0 + 4.0 * bx * bx));
}

/// Equilibrium tail of the power-of-choice limit process. Without `x_max` the
/// vector ends at the first index whose tail drops below `tolerance`.
inline TailVector poc_invariant_tail(double beta,
                                     std::optional<std::size_t> x_max = {},
                                     double tolerance = kTailTolerance) {
  require_positive_beta(beta);
  TailVector out{beta, {1.0}};
  for (;;) {
    if (x_max ? out.tail.size() > *x_max : out.tail.back() < tolerance) break;
    out.tail.push_back(poc_tail_step(beta, out.tail.back()));
  }
  return out;
}

/// log xi(x) for x = 0..x_max. Stays finite far past the point where xi
/// itself underflows a double.
inline std::vector<double> poc_log_tail(double beta, std::size_t x_max) {
  require_positive_beta(beta);
  std::vector<double> out{0.0};
  const double log_2beta = std::log(2.0 * beta);
  while (out.size() <= x_max) {
    const double l = out.back();
    const double u = 4.0 * beta * beta * std::exp(2.0 * l);
    out.push_back(log_2beta + 2.0 * l - std::log(1.0 + std::sqrt(1.0 + u)));
  }
  return out;
}

/// Right-hand side of the tail ODE on {1, ..., K}, with F(0) = 1 and
/// F(K+1) = 0. Entry 0 of the result is always 0.
inline void poc_tail_derivative(double beta, std::span<const double> f,
                                std::span<double> df) {
  df[0] = 0.0;
  for (std::size_t x = 1; x < f.size(); ++x) {
    const double prev = f[x - 1];
    df[x] = beta * (prev * prev - f[x] * f[x]) - f[x];
  }
}

inline std::vector<double> poc_tail_derivative(double beta, const TailVector& f) {
  std::vector<double> df(f.tail.size());
  poc_tail_derivative(beta, f.tail, df);
  return df;
}

/// Integrates the transient tail of the power-of-choice limit with classical
/// fixed-step RK4. `dt` defaults to 0.01 / (1 + beta). The state is
/// extended with zeros so that it covers at least the support of the
/// equilibrium tail.
inline TailVector poc_tail_ode(double beta, const TailVector& initial,
                               double t_end, std::optional<double> dt = {}) {
  require_positive_beta(beta);
  if (!initial.valid(1e-9)) throw DomainError("initial tail is not a valid tail vector");
  if (!(t_end >= 0.0)) throw DomainError("t_end must be >= 0");
  const double step = dt.value_or(0.01 / (1.0 + beta));
  if (!(step > 0.0)) throw DomainError("dt must be > 0");

  const std::size_t size =
      std::max(initial.tail.size(), poc_invariant_tail(beta).tail.size() + 8);
  std::vector<double> f(size, 0.0);
  std::copy(initial.tail.begin(), initial.tail.end(), f.begin());
  f[0] = 1.0;

  const auto steps = static_cast<std::uint64_t>(std::ceil(t_end / step - 1e-9));
  const double h = steps ? t_end / static_cast<double>(steps) : 0.0;
  std::vector<double> k1(size), k2(size), k3(size), k4(size), tmp(size);
  for (std::uint64_t i = 0; i < steps; ++i) {
    poc_tail_derivative(beta, f, k1);
    for (std::size_t x = 0; x < size; ++x) tmp[x] = f[x] + 0.5 * h * k1[x];
    poc_tail_derivative(beta, tmp, k2);
    for (std::size_t x = 0; x < size; ++x) tmp[x] = f[x] + 0.5 * h * k2[x];
    poc_tail_derivative(beta, tmp, k3);
    for (std::size_t x = 0; x < size; ++x) tmp[x] = f[x] + h * k3[x];
    poc_tail_derivative(beta, tmp, k4);
    for (std::size_t x = 1; x < size; ++x)
      f[x] += h / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]);
  }
  // Round-off can leave entries a few ulps outside [0, 1] or out of order.
  for (std::size_t x = 1; x < size; ++x) f[x] = std::clamp(f[x], 0.0, f[x - 1]);
  return {beta, std::move(f)};
}

/// Point mass at `value`, as a tail vector.
inline TailVector point_mass_tail(double beta, std::size_t value) {
  return {beta, std::vector<double>(value + 1, 1.0)};
}

/// A trajectory of the random-policy limit process: (time, value) at the
/// start and after every jump.
struct LimitProcessSample {
  std::vector<std::pair<double, std::uint64_t>> path;

  std::uint64_t value_at(double t) const {
    auto it = std::upper_bound(path.begin(), path.end(), t,
                               [](double v, const auto& p) { return v < p.first; });
    return it == path.begin() ? path.front().second : std::prev(it)->second;
  }
};

/// Jumps +1 at rate beta and resets to 0 at rate 1, up to `t_end`.
inline LimitProcessSample simulate_limit_random(double beta, double t_end, Rng& rng,
                                                std::uint64_t initial = 0) {
  require_positive_beta(beta);
  LimitProcessSample out;
  out.path.emplace_back(0.0, initial);
  std::exponential_distribution<double> holding(beta + 1.0);
  std::bernoulli_distribution grows(beta / (beta + 1.0));
  double t = 0.0;
  std::uint64_t x = initial;
  for (;;) {
    t += holding(rng);
    if (t > t_end) break;
    x = grows(rng) ? x + 1 : 0;
    out.path.emplace_back(t, x);
  }
  return out;
}

/// Large-beta limit of P(X / beta >= x): exp(-x) for random placement and
/// (1 - x/2)^+ for power of choice.
inline double scaled_limit_tail(PolicyKind policy, double x) {
  if (!(x >= 0.0)) throw DomainError("x must be >= 0");
  switch (policy) {
    case PolicyKind::random: return std::exp(-x);
    case PolicyKind::power_of_choice: return std::max(1.0 - x / 2.0, 0.0);
    case PolicyKind::least_loaded: break;
  }
  throw UnsupportedError("no scaling law for least_loaded");
}

/// Invariant tail of the large-N limit for the given policy.
inline TailVector invariant_tail(PolicyKind policy, double beta,
                                 std::optional<std::size_t> x_max = {}) {
  switch (policy) {
    case PolicyKind::random: return random_invariant_tail(beta, x_max);
    case PolicyKind::power_of_choice: return poc_invariant_tail(beta, x_max);
    case PolicyKind::least_loaded: break;
  }
  throw UnsupportedError("no invariant law for least_loaded");
}

/// max over `grid` of |xi(ceil(x * beta)) - limit(x)|.
inline double scaling_gap(PolicyKind policy, const TailVector& t,
                          std::span<const double> grid) {
  double gap = 0.0;
  for (double x : grid) {
    const auto idx = static_cast<std::size_t>(std::ceil(x * t.beta));
    gap = std::max(gap, std::abs(t.at(idx) - scaled_limit_tail(policy, x)));
  }
  return gap;
}

/// The grid {0, 0.25, ..., 3}.
inline std::vector<double> default_scaling_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 12; ++i) g.push_back(0.25 * i);
  return g;
}

}  // namespace placement_lab

#endif  // PLACEMENT_LAB_MEANFIELD_HPP
