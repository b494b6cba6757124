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

// Scenario configuration, execution and report files.

#ifndef HETLINK_SCENARIO_HPP
#define HETLINK_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetlink/budget.hpp"
#include "hetlink/ion_node.hpp"
#include "hetlink/link.hpp"
#include "hetlink/memory.hpp"
#include "hetlink/photon_chain.hpp"
#include "hetlink/pump_planner.hpp"

namespace hetlink::scenario {

enum class Scenario { IonPhoton, PostQfc, TiQm, Chsh, Budget, AfcSweep, BandwidthSweep };

std::string scenario_name(Scenario s);
std::optional<Scenario> scenario_from_name(const std::string& name);

struct TomographyRun {
  long long heralds = 0;
  double snr = 28.0;
  double delay_us = 0.0;
  bool qfc = false;
  bool storage = false;
  bool pbs = false;
};

struct ChshRun {
  long long heralds = 3634;
  std::string source = "ti_qm";
  std::string settings = "xz";  // "xz" or "optimal"
  double theta_b0 = 0.0;
  double theta_b1 = 0.0;
};

struct SweepRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::TiQm;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "out";
  std::string format = "json";
  int bootstrap_resamples = 200;
  int threads = 0;

  ion::IonParams ion;
  ion::SpamParams spam;
  photon::JitterParams jitter;
  photon::NoiseParams noise;
  double signal_rate_hz = 0.2;
  double noise_rate_hz = 0.007;
  budget::ErrorModelInputs errors;  // scalar error rates and storage probes
  std::optional<photon::ProcessMatrix> qfc_chi;
  link::StorageStage storage;
  memory::CombParams comb;
  memory::SpectralModel spectral;
  memory::StarkControl stark;
  memory::PumpConfig pump;
  double native_d_h = 5.24;
  double native_d_v = 4.66;
  budget::LinkTables link;
  std::map<std::string, TomographyRun> tomography;  // keyed by scenario name
  ChshRun chsh;
  SweepRange afc_t_us{0.5, 5.0, 0.05};
  SweepRange bandwidth_df_mhz{-60.0, 60.0, 1.0};
};

/// Recursively applies `patch` onto `base` (RFC 7386).
nlohmann::json merge_config(nlohmann::json base, const nlohmann::json& patch);

/// Parses and validates a merged config document. Relative file references
/// resolve against `search_dirs` in order. Throws ConfigError listing every
/// missing or invalid field for the sections the scenario needs.
ExperimentConfig load_config(const nlohmann::json& doc, const std::vector<std::filesystem::path>& search_dirs);

/// Pipeline parameters for a tomography scenario name.
link::PipelineParams pipeline_params(const ExperimentConfig& cfg, const std::string& which);

struct Stat {
  double value = 0.0;
  std::optional<double> stddev;  // nullopt: exact

  static Stat exact(double v) { return {v, std::nullopt}; }
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::optional<long long> heralds;
  std::optional<CMatrix> matrix;
  std::optional<Stat> fidelity;
  std::optional<Stat> analytic_fidelity;
  std::optional<Stat> chsh;
  std::optional<Stat> herald_probability;
  std::vector<link::StageRecord> channels;
  nlohmann::json analytic = nlohmann::json::object();  // scenario-specific exact values
  std::map<std::string, std::string> tables;           // CSV name -> content
  double runtime_s = 0.0;
};

/// Deterministic for a fixed config. Throws ConvergenceError when the
/// reconstruction does not converge.
RunReport run(const ExperimentConfig& cfg);

/// Summary document with 15-significant-digit values and explicit nulls.
nlohmann::json summary_json(const RunReport& r);

/// Writes <scenario>_seed<seed>.{summary.json|summary.csv}, .matrix.json,
/// one .<table>.csv per table and a separate .timing.json. Returns the paths.
std::vector<std::filesystem::path> emit_report(const RunReport& r, const std::string& format,
                                               const std::filesystem::path& dir);

}  // namespace hetlink::scenario

#endif  // HETLINK_SCENARIO_HPP
