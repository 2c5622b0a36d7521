// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

// specrl: run scenario sweeps and validate scenario files.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "specrl/sweep/emit.hpp"

namespace {

namespace sw = specrl::sweep;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void print_violations(const std::string& ref, const specrl::ConfigError& e) {
  std::cerr << ref << ": " << e.violations().size() << " error(s)\n";
  for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
}

sw::ScenarioSpec load(const std::string& ref, std::optional<std::uint64_t> seed, std::optional<std::size_t> max_cells) {
  sw::json doc = sw::read_json_file(sw::resolve_scenario_ref(ref));
  if (seed && doc.is_object()) doc["seed"] = *seed;
  return sw::load_scenario(doc, max_cells);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speculative decoding cost and pipeline simulator for RL rollouts"};
  app.set_version_flag("--version", std::string(specrl::kVersion));
  app.require_subcommand(1);

  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_cells;
  std::string out_dir;
  std::size_t threads = 0;
  std::string format = "all";
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a scenario file or shipped preset");
  run->add_option("scenario", scenario, "Scenario path or preset name")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out-dir", out_dir, "Output directory")->envname("SPECRL_OUT_DIR")->default_str("out");
  run->add_option("--threads", threads, "Worker threads (0: hardware concurrency)");
  run->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "text", "all"}));
  run->add_option("--max-cells", max_cells, "Override the cell cap");
  run->add_flag("--quiet", quiet, "Do not print the table");

  std::vector<std::string> to_validate;
  auto* validate = app.add_subcommand("validate", "Check scenario files without running them");
  validate->add_option("scenarios", to_validate, "Scenario paths or preset names")->required();

  auto* list = app.add_subcommand("list-presets", "List shipped presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (list->parsed()) {
    for (const auto& name : sw::list_presets()) std::cout << name << "\n";
    return kOk;
  }

  if (validate->parsed()) {
    int rc = kOk;
    for (const auto& ref : to_validate) {
      try {
        const auto spec = load(ref, std::nullopt, std::nullopt);
        std::cout << ref << ": ok (" << spec.cell_count() << " cells)\n";
      } catch (const specrl::ConfigError& e) {
        print_violations(ref, e);
        rc = kConfigError;
      } catch (const std::exception& e) {
        std::cerr << ref << ": " << e.what() << "\n";
        rc = kConfigError;
      }
    }
    return rc;
  }

  sw::ScenarioSpec spec;
  try {
    spec = load(scenario, seed, max_cells);
  } catch (const specrl::ConfigError& e) {
    print_violations(scenario, e);
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << scenario << ": " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (out_dir.empty()) out_dir = "out";
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const auto result = sw::run_scenario(spec, threads);
    const auto fmt = format == "csv" ? sw::Format::kCsv : format == "text" ? sw::Format::kText : sw::Format::kAll;
    const auto written = sw::write_outputs(spec, result, out_dir, fmt);
    if (!quiet) std::cout << sw::to_text(sw::cell_table(result));
    for (const auto& v : sw::cross_check(result)) std::cerr << "cross-check: " << v << "\n";
    for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
