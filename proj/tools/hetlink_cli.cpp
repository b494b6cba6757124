// Copyright 2026 The hetlink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hetlink run --scenario ti_qm [--config patch.json] [--seed N] [--shots N]
//             [--out DIR] [--format json|csv] [--defaults FILE]

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetlink/error.hpp"
#include "hetlink/scenario.hpp"

#ifndef HETLINK_DATA_DIR
#define HETLINK_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
namespace sc = hetlink::scenario;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw hetlink::ConfigError({p.string() + ": cannot open"});
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw hetlink::ConfigError({p.string() + ": " + e.what()});
  }
}

struct RunArgs {
  std::string scenario;
  std::string config;
  std::string defaults = std::string(HETLINK_DATA_DIR) + "/defaults.json";
  std::optional<std::uint64_t> seed;
  std::optional<long long> shots;
  std::string out;
  std::string format;
  bool no_defaults = false;
};

int do_run(const RunArgs& a) {
  json doc = json::object();
  std::vector<fs::path> search;
  if (!a.no_defaults) {
    doc = read_json(a.defaults);
  }
  if (!a.config.empty()) {
    const json patch = read_json(a.config);
    if (!patch.is_object()) throw hetlink::ConfigError({a.config + ": must be a JSON object"});
    doc = sc::merge_config(doc, patch);
    search.push_back(fs::absolute(a.config).parent_path());
  }
  search.push_back(fs::current_path());
  search.push_back(HETLINK_DATA_DIR);

  // Flags override config fields.
  if (!a.scenario.empty()) doc["scenario"] = a.scenario;
  if (a.seed) doc["master_seed"] = *a.seed;
  if (!a.out.empty()) doc["output_dir"] = a.out;
  if (!a.format.empty()) doc["format"] = a.format;
  if (a.shots) {
    const std::string name = doc.value("scenario", std::string());
    if (name != "ion_photon" && name != "post_qfc" && name != "ti_qm" && name != "chsh") {
      throw hetlink::ConfigError({"--shots: scenario '" + name + "' does not sample heralds"});
    }
    doc["scenarios"][name]["heralds"] = *a.shots;
  }

  const sc::ExperimentConfig cfg = sc::load_config(doc, search);
  const sc::RunReport rep = sc::run(cfg);
  for (const auto& p : sc::emit_report(rep, cfg.format, cfg.output_dir)) std::cout << p.string() << "\n";

  const json s = sc::summary_json(rep);
  if (!s["fidelity"].is_null()) {
    std::printf("fidelity %.6f +- %.6f\n", s["fidelity"]["value"].get<double>(),
                s["fidelity"]["stddev"].get<double>());
  }
  if (!s["chsh"].is_null()) {
    std::printf("S %.6f +- %.6f\n", s["chsh"]["value"].get<double>(), s["chsh"]["stddev"].get<double>());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetlink: trapped-ion / rare-earth memory link simulator"};
  app.require_subcommand(1);

  RunArgs a;
  long long shots = 0;
  std::uint64_t seed = 0;
  CLI::App* run = app.add_subcommand("run", "Run one scenario and write its reports");
  run->add_option("--scenario", a.scenario, "ion_photon, post_qfc, ti_qm, chsh, budget, afc_sweep, bandwidth_sweep");
  run->add_option("--config", a.config, "JSON merge patch applied on top of the defaults");
  run->add_option("--defaults", a.defaults, "Base config file");
  run->add_flag("--no-defaults", a.no_defaults, "Use --config as the complete config");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed");
  auto* shots_opt = run->add_option("--shots", shots, "Heralds for the sampled scenario")->check(CLI::PositiveNumber);
  run->add_option("--out", a.out, "Output directory");
  run->add_option("--format", a.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (*seed_opt) a.seed = seed;
  if (*shots_opt) a.shots = shots;

  try {
    return do_run(a);
  } catch (const hetlink::ConfigError& e) {
    std::cerr << "config error:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    return kExitConfig;
  } catch (const hetlink::ConvergenceError& e) {
    std::cerr << "did not converge: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
