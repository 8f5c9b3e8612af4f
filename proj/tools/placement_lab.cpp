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

// placement_lab: batch driver for the replica-placement simulator.
//
//   placement_lab simulate  --spec s.json [--out dir] [--jobs n] [--<key> v]...
//   placement_lab compare   --spec s.json [--policy p] [--out dir] [--jobs n]
//   placement_lab meanfield --beta b --policy p [--x_max n] [--out dir]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "placement_lab/experiment.hpp"

namespace pl = placement_lab;

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

void init_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_st("placement_lab"));
  const char* env = std::getenv("PLACEMENT_LAB_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "warn") spdlog::set_level(spdlog::level::warn);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::set_level(spdlog::level::info);
  spdlog::set_pattern("[%l] %v");
}

struct SpecArgs {
  std::string spec_path;
  std::string out;
  unsigned jobs = 1;
  std::map<std::string, std::string> overrides;
};

void add_spec_options(CLI::App* cmd, SpecArgs& args) {
  cmd->add_option("--spec", args.spec_path, "JSON experiment spec")->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory (overrides `outputs`)");
  cmd->add_option("--jobs", args.jobs, "concurrent runs")->check(CLI::PositiveNumber);
  for (const auto& key : pl::spec_keys()) {
    if (key == "outputs") continue;
    cmd->add_option_function<std::string>(
        "--" + key, [&args, key](const std::string& v) { args.overrides[key] = v; },
        "override spec key `" + key + "`");
  }
}

pl::ExperimentSpec resolve_spec(const SpecArgs& args) {
  pl::ExperimentSpec spec;
  if (!args.spec_path.empty()) spec = pl::load_spec(args.spec_path);
  nlohmann::json patch = nlohmann::json::object();
  for (const auto& [key, raw] : args.overrides) {
    auto v = nlohmann::json::parse(raw, nullptr, false);
    patch[key] = v.is_discarded() ? nlohmann::json(raw) : v;
  }
  pl::apply_spec_json(spec, patch);
  if (!args.out.empty()) spec.outputs = args.out;
  spec.validate();
  return spec;
}

int cmd_simulate(const SpecArgs& args) {
  const auto spec = resolve_spec(args);
  spdlog::info("simulate: {} runs, policy={}, mode={}, N={}, F*={}, d={}, horizon={}d",
               spec.runs, pl::to_string(spec.base.policy), pl::to_string(spec.base.mode),
               spec.base.n_nodes, spec.base.n_blocks, spec.base.replication,
               spec.base.horizon_days);
  const auto start = std::chrono::steady_clock::now();
  const auto traces = pl::run_batch(spec, args.jobs);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  spdlog::debug("simulation took {:.2f}s", secs);
  const auto summary = pl::write_simulation_artifacts(spec, traces, spec.outputs);
  if (summary.max_load)
    spdlog::info("mean of max load {:.2f} (min {}, max {}) over {} samples",
                 summary.max_load->mean_of_max, summary.max_load->min, summary.max_load->max,
                 summary.max_load->samples);
  else
    spdlog::warn("no snapshots after the warmup; maxload.csv has no rows");
  spdlog::info("lost blocks: {}; artifacts in {}", summary.lost_blocks, spec.outputs);
  return 0;
}

int cmd_compare(const SpecArgs& args) {
  auto spec = resolve_spec(args);
  const auto report = pl::compare(spec, args.jobs, spec.outputs);
  spdlog::info("{}: ks_distance={:.5f} mean_gap={:.5f} samples={}", report.model,
               report.ks_distance, report.mean_gap, report.samples);
  return 0;
}

struct MeanfieldArgs {
  double beta = 0.0;
  std::string policy;
  std::optional<std::size_t> x_max;
  std::string out = "out";
};

int cmd_meanfield(const MeanfieldArgs& args) {
  const auto policy = pl::parse_policy(args.policy);
  if (!policy) throw pl::ConfigError("policy", "unknown policy '" + args.policy + "'");
  if (!(args.beta > 0.0)) throw pl::ConfigError("beta", "must be > 0");
  pl::write_meanfield_artifacts(args.beta, *policy, args.x_max, args.out);
  spdlog::info("meanfield: wrote {}/meanfield.csv", args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Replica-placement simulator and mean-field toolkit"};
  app.require_subcommand(1);

  SpecArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "run a batch of simulations");
  add_spec_options(simulate, sim_args);

  SpecArgs cmp_args;
  auto* comparec = app.add_subcommand("compare", "fit stationary loads to the limit law");
  add_spec_options(comparec, cmp_args);

  MeanfieldArgs mf_args;
  auto* meanfield = app.add_subcommand("meanfield", "evaluate an invariant limit law");
  meanfield->add_option("--beta", mf_args.beta, "average load per node")->required();
  meanfield->add_option("--policy", mf_args.policy, "random or power_of_choice")->required();
  meanfield->add_option("--x_max", mf_args.x_max, "truncation index");
  meanfield->add_option("--out", mf_args.out, "output directory");
  meanfield->add_option("--jobs", sim_args.jobs, "ignored");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*simulate) return cmd_simulate(sim_args);
    if (*comparec) return cmd_compare(cmp_args);
    return cmd_meanfield(mf_args);
  } catch (const pl::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kConfigExit;
  } catch (const pl::UnsupportedError& e) {
    spdlog::error("unsupported: {}", e.what());
    return kConfigExit;
  } catch (const pl::DomainError& e) {
    spdlog::error("domain error: {}", e.what());
    return kConfigExit;
  } catch (const std::exception& e) {
    spdlog::error("runtime error: {}", e.what());
    return kRuntimeExit;
  }
}
