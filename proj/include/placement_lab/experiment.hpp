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

// Experiment specs, multi-run orchestration and CSV artifacts.
//
// A spec is a JSON object whose keys are the SimConfig fields plus `runs`,
// `seed_base`, `outputs`, `warmup_days` and `age_bin_days`. Unknown keys are
// rejected. Run k is seeded with seed_base + k.

#ifndef PLACEMENT_LAB_EXPERIMENT_HPP
#define PLACEMENT_LAB_EXPERIMENT_HPP

#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "placement_lab/config.hpp"
#include "placement_lab/meanfield.hpp"
#include "placement_lab/simulator.hpp"
#include "placement_lab/stats.hpp"

namespace placement_lab {

struct ExperimentSpec {
  SimConfig base;
  std::uint32_t runs = 20;
  std::uint64_t seed_base = 1;
  std::string outputs = "out";
  std::optional<double> warmup_days;
  double age_bin_days = 1.0;

  double warmup() const { return warmup_days.value_or(default_warmup_days(base.mtbf_days)); }

  SimConfig config_for_run(std::uint32_t k) const {
    SimConfig c = base;
    c.seed = seed_base + k;
    return c;
  }

  void validate() const {
    base.validate();
    if (runs < 1) throw ConfigError("runs", "must be >= 1");
    if (warmup_days && !(*warmup_days >= 0.0))
      throw ConfigError("warmup_days", "must be >= 0");
    if (!(age_bin_days > 0.0)) throw ConfigError("age_bin_days", "must be > 0");
  }
};

inline const std::vector<std::string>& spec_keys() {
  static const std::vector<std::string> keys = {
      "n_nodes",         "n_blocks",     "replication",
      "mtbf_days",       "block_size_mb", "bandwidth_mbps",
      "latency_s",       "maintenance_period_hours",
      "policy",          "mode",         "horizon_days",
      "seed",            "snapshot_period_days",
      "bootstrap",       "runs",         "seed_base",
      "outputs",         "warmup_days",  "age_bin_days"};
  return keys;
}

namespace detail {

template <class T>
T json_uint(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(key, "expected a non-negative integer");
  const auto raw = v.get<std::uint64_t>();
  if (raw > std::numeric_limits<T>::max()) throw ConfigError(key, "out of range");
  return static_cast<T>(raw);
}

inline double json_double(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

inline std::string json_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

}  // namespace detail

/// Applies the keys of `j` on top of `spec`.
inline void apply_spec_json(ExperimentSpec& spec, const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("spec", "expected a JSON object");
  auto& c = spec.base;
  bool explicit_seed_base = false;
  std::optional<std::uint64_t> seed;
  for (const auto& [key, v] : j.items()) {
    if (key == "n_nodes") c.n_nodes = json_uint<std::uint32_t>(v, key);
    else if (key == "n_blocks") c.n_blocks = json_uint<std::uint32_t>(v, key);
    else if (key == "replication") c.replication = json_uint<std::uint32_t>(v, key);
    else if (key == "mtbf_days") c.mtbf_days = json_double(v, key);
    else if (key == "block_size_mb") c.block_size_mb = json_double(v, key);
    else if (key == "bandwidth_mbps") c.bandwidth_mbps = json_double(v, key);
    else if (key == "latency_s") c.latency_s = json_double(v, key);
    else if (key == "maintenance_period_hours") c.maintenance_period_hours = json_double(v, key);
    else if (key == "horizon_days") c.horizon_days = json_double(v, key);
    else if (key == "snapshot_period_days") c.snapshot_period_days = json_double(v, key);
    else if (key == "seed") seed = json_uint<std::uint64_t>(v, key);
    else if (key == "policy") {
      auto p = parse_policy(json_string(v, key));
      if (!p) throw ConfigError(key, "unknown policy '" + v.get<std::string>() + "'");
      c.policy = *p;
    } else if (key == "mode") {
      auto m = parse_mode(json_string(v, key));
      if (!m) throw ConfigError(key, "unknown mode '" + v.get<std::string>() + "'");
      c.mode = *m;
    } else if (key == "bootstrap") {
      auto b = parse_bootstrap(json_string(v, key));
      if (!b) throw ConfigError(key, "unknown bootstrap '" + v.get<std::string>() + "'");
      c.bootstrap = *b;
    } else if (key == "runs") spec.runs = json_uint<std::uint32_t>(v, key);
    else if (key == "seed_base") {
      spec.seed_base = json_uint<std::uint64_t>(v, key);
      explicit_seed_base = true;
    } else if (key == "outputs") spec.outputs = json_string(v, key);
    else if (key == "warmup_days") spec.warmup_days = json_double(v, key);
    else if (key == "age_bin_days") spec.age_bin_days = json_double(v, key);
    else throw ConfigError(key, "unknown key");
  }
  if (seed) {
    c.seed = *seed;
    if (!explicit_seed_base) spec.seed_base = *seed;
  }
}

inline ExperimentSpec parse_spec(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("spec", std::string("invalid JSON: ") + e.what());
  }
  ExperimentSpec spec;
  apply_spec_json(spec, j);
  spec.validate();
  return spec;
}

inline ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("spec", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

/// Runs every seed of the spec, up to `jobs` at a time. Results are ordered
/// by run index regardless of completion order.
inline std::vector<EventTrace> run_batch(const ExperimentSpec& spec, unsigned jobs = 1) {
  spec.validate();
  std::vector<EventTrace> out(spec.runs);
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      const auto k = next.fetch_add(1);
      if (k >= spec.runs) return;
      try {
        const SimConfig c = spec.config_for_run(k);
        Rng rng(c.seed);
        out[k] = run(c, rng);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min(jobs, spec.runs));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---- CSV -----------------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::uint64_t v) { return std::to_string(v); }

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string_view header)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }

  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return format_number(v); }
  template <class T>
    requires std::is_integral_v<T>
  static std::string cell(T v) { return std::to_string(v); }

  std::ofstream out_;
};

inline constexpr std::string_view kLoadsHeader = "run,time_days,node_slot,age_days,load";
inline constexpr std::string_view kCdfHeader = "policy,load,cum_fraction";
inline constexpr std::string_view kAgeLoadHeader = "policy,age_days,mean_load,samples";
inline constexpr std::string_view kMaxLoadHeader = "policy,mean_of_max,min,max,samples";
inline constexpr std::string_view kLossesHeader =
    "run,seed,failures,lost_blocks,transfers_enqueued,transfers_dropped,copies_placed";
inline constexpr std::string_view kMeanfieldHeader = "beta,policy,x,tail,pmf";
inline constexpr std::string_view kMeanfieldScaledHeader = "beta,policy,x_over_beta,tail,limit_tail";
inline constexpr std::string_view kFitHeader = "policy,beta,n_nodes,ks_distance,mean_gap,samples";
inline constexpr std::string_view kCompareCdfHeader = "policy,load,empirical_cdf,model_cdf";

/// Outcome of `write_simulation_artifacts`; absent statistics mean there
/// were no snapshots after the warmup.
struct SimulationSummary {
  std::optional<MaxLoadStats> max_load;
  std::size_t age_bins = 0;
  std::uint64_t lost_blocks = 0;
};

inline SimulationSummary write_simulation_artifacts(const ExperimentSpec& spec,
                                                    std::span<const EventTrace> traces,
                                                    const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "runs");
  const std::string policy(to_string(spec.base.policy));
  SimulationSummary summary;

  {
    CsvWriter w(dir / "loads.csv", kLoadsHeader);
    for (std::size_t r = 0; r < traces.size(); ++r)
      for (const auto& snap : traces[r].snapshots)
        for (Slot s = 0; s < snap.nodes.size(); ++s)
          w.row(r, snap.time, s, snap.nodes[s].age_days, snap.nodes[s].load);
  }
  {
    CsvWriter w(dir / "cdf.csv", kCdfHeader);
    const auto cdf = final_distribution(traces).cdf_table();
    for (std::size_t x = 0; x < cdf.size(); ++x) w.row(policy, x, cdf[x]);
  }
  {
    CsvWriter w(dir / "age_load.csv", kAgeLoadHeader);
    const auto bins = load_vs_age(traces, spec.age_bin_days, spec.warmup());
    for (const auto& b : bins) w.row(policy, b.age_days, b.mean_load, b.samples);
    summary.age_bins = bins.size();
  }
  {
    CsvWriter w(dir / "maxload.csv", kMaxLoadHeader);
    try {
      const auto m = max_load_stats(traces, spec.warmup(), spec.base.snapshot_period_days);
      w.row(policy, m.mean_of_max, m.min, m.max, m.samples);
      summary.max_load = m;
    } catch (const DomainError&) {
    }
  }
  {
    CsvWriter w(dir / "losses.csv", kLossesHeader);
    for (std::uint32_t r = 0; r < traces.size(); ++r) {
      const auto& t = traces[r];
      w.row(r, spec.seed_base + r, t.failures, t.lost_blocks, t.transfers_enqueued,
            t.transfers_dropped, t.copies_placed);
      summary.lost_blocks += t.lost_blocks;
    }
  }
  for (std::uint32_t r = 0; r < traces.size(); ++r) {
    const auto& t = traces[r];
    nlohmann::json j;
    j["run"] = r;
    j["seed"] = spec.seed_base + r;
    j["mode"] = to_string(t.mode);
    j["policy"] = to_string(t.policy);
    j["n_nodes"] = t.n_nodes;
    j["total_copies"] = t.total_copies;
    j["horizon_days"] = t.horizon_days;
    j["failures"] = t.failures;
    j["copies_placed"] = t.copies_placed;
    j["transfers_enqueued"] = t.transfers_enqueued;
    j["transfers_dropped"] = t.transfers_dropped;
    j["lost_blocks"] = t.lost_blocks;
    j["snapshots"] = t.snapshots.size();
    if (!t.snapshots.empty()) {
      std::uint32_t mx = 0;
      std::uint64_t sum = 0;
      for (const auto& n : t.snapshots.back().nodes) {
        mx = std::max(mx, n.load);
        sum += n.load;
      }
      j["final_max_load"] = mx;
      j["final_live_copies"] = sum;
    }
    char name[32];
    std::snprintf(name, sizeof name, "run_%04u.json", r);
    std::ofstream out(dir / "runs" / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write run summary");
    out << j.dump(2) << '\n';
  }
  return summary;
}

inline void write_meanfield_artifacts(double beta, PolicyKind policy,
                                      std::optional<std::size_t> x_max,
                                      const std::filesystem::path& dir) {
  const TailVector t = invariant_tail(policy, beta, x_max);
  std::filesystem::create_directories(dir);
  const std::string name(to_string(policy));
  {
    CsvWriter w(dir / "meanfield.csv", kMeanfieldHeader);
    for (std::size_t x = 0; x <= t.x_max(); ++x) w.row(beta, name, x, t.at(x), t.pmf(x));
  }
  CsvWriter w(dir / "meanfield_scaled.csv", kMeanfieldScaledHeader);
  for (std::size_t x = 0; x <= t.x_max(); ++x) {
    const double u = static_cast<double>(x) / beta;
    w.row(beta, name, u, t.at(x), scaled_limit_tail(policy, u));
  }
}

/// Simulates an idealized spec and fits the pooled stationary loads against
/// the policy's invariant law. Writes fit.csv and compare_cdf.csv.
inline FitReport compare(const ExperimentSpec& spec, unsigned jobs,
                         const std::filesystem::path& dir) {
  if (spec.base.mode != Mode::idealized)
    throw ConfigError("mode", "compare needs the idealized mode");
  if (spec.base.policy == PolicyKind::least_loaded)
    throw UnsupportedError("least_loaded has no analytic law to compare against");
  const auto traces = run_batch(spec, jobs);
  const auto emp = stationary_distribution(traces, spec.warmup());
  const double beta = spec.base.beta();
  const TailVector model = invariant_tail(spec.base.policy, beta);
  const std::string name(to_string(spec.base.policy));
  FitReport report = fit(emp, model, name);

  std::filesystem::create_directories(dir);
  {
    CsvWriter w(dir / "fit.csv", kFitHeader);
    w.row(name, beta, spec.base.n_nodes, report.ks_distance, report.mean_gap, report.samples);
  }
  CsvWriter w(dir / "compare_cdf.csv", kCompareCdfHeader);
  const auto cdf = emp.cdf_table();
  const std::size_t top = std::max(emp.max_value(), model.x_max());
  for (std::size_t x = 0; x <= top; ++x)
    w.row(name, x, x < cdf.size() ? cdf[x] : 1.0, model.cdf(x));
  return report;
}

}  // namespace placement_lab

#endif  // PLACEMENT_LAB_EXPERIMENT_HPP
