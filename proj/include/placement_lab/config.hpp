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

#ifndef PLACEMENT_LAB_CONFIG_HPP
#define PLACEMENT_LAB_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace placement_lab {

/// Invalid experiment parameters. `key()` names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// No node is eligible to receive a copy.
class SelectionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
  using std::domain_error::domain_error;
};

/// Operation not defined for the requested policy or trace kind.
class UnsupportedError : public std::logic_error {
  using std::logic_error::logic_error;
};

enum class PolicyKind { random, least_loaded, power_of_choice };
enum class Mode { idealized, detailed };
enum class Bootstrap { optimal, policy };

constexpr std::string_view to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::random: return "random";
    case PolicyKind::least_loaded: return "least_loaded";
    case PolicyKind::power_of_choice: return "power_of_choice";
  }
  return "?";
}

constexpr std::string_view to_string(Mode m) {
  return m == Mode::idealized ? "idealized" : "detailed";
}

constexpr std::string_view to_string(Bootstrap b) {
  return b == Bootstrap::optimal ? "optimal" : "policy";
}

inline std::optional<PolicyKind> parse_policy(std::string_view s) {
  if (s == "random") return PolicyKind::random;
  if (s == "least_loaded") return PolicyKind::least_loaded;
  if (s == "power_of_choice") return PolicyKind::power_of_choice;
  return std::nullopt;
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "idealized") return Mode::idealized;
  if (s == "detailed") return Mode::detailed;
  return std::nullopt;
}

inline std::optional<Bootstrap> parse_bootstrap(std::string_view s) {
  if (s == "optimal") return Bootstrap::optimal;
  if (s == "policy") return Bootstrap::policy;
  return std::nullopt;
}

/// Parameters of one simulation run. Durations are in the unit named by the
/// field; simulation time itself is measured in days.
struct SimConfig {
  std::uint32_t n_nodes = 200;
  std::uint32_t n_blocks = 10000;
  std::uint32_t replication = 3;
  double mtbf_days = 7.0;
  double block_size_mb = 10.0;
  double bandwidth_mbps = 5.5;
  double latency_s = 0.1;
  double maintenance_period_hours = 1.0;
  PolicyKind policy = PolicyKind::power_of_choice;
  Mode mode = Mode::detailed;
  double horizon_days = 729.0;
  std::uint64_t seed = 1;
  double snapshot_period_days = 1.0;
  // Unset means the mode default: optimal for idealized, policy for detailed.
  std::optional<Bootstrap> bootstrap;

  Bootstrap effective_bootstrap() const {
    if (bootstrap) return *bootstrap;
    return mode == Mode::idealized ? Bootstrap::optimal : Bootstrap::policy;
  }

  /// F_N, the total number of copies.
  std::uint64_t total_copies() const {
    return std::uint64_t{n_blocks} * replication;
  }

  /// Average load per node.
  double beta() const {
    return static_cast<double>(total_copies()) / n_nodes;
  }

  /// Service time of one block transfer, in seconds.
  double transfer_seconds() const {
    return latency_s + block_size_mb * 8.0 / bandwidth_mbps;
  }

  /// Throws ConfigError naming the first invalid field.
  void validate() const {
    if (n_nodes < 1) throw ConfigError("n_nodes", "must be >= 1");
    if (n_blocks < 1) throw ConfigError("n_blocks", "must be >= 1");
    if (replication < 1) throw ConfigError("replication", "must be >= 1");
    if (replication > n_nodes)
      throw ConfigError("replication", "must not exceed n_nodes");
    // Repair of a lost copy needs a non-holder besides the failed node.
    if (mode == Mode::idealized && replication >= n_nodes)
      throw ConfigError("replication",
                        "idealized mode needs replication <= n_nodes - 1");
    auto positive = [](double v, const char* key) {
      if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
    };
    positive(mtbf_days, "mtbf_days");
    positive(block_size_mb, "block_size_mb");
    positive(bandwidth_mbps, "bandwidth_mbps");
    positive(latency_s, "latency_s");
    positive(maintenance_period_hours, "maintenance_period_hours");
    positive(snapshot_period_days, "snapshot_period_days");
    if (!(horizon_days >= 0.0))
      throw ConfigError("horizon_days", "must be >= 0");
  }
};

}  // namespace placement_lab

#endif  // PLACEMENT_LAB_CONFIG_HPP
