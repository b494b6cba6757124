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

#include "hetlink/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "hetlink/tomography.hpp"

namespace hetlink::scenario {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Names

namespace {

const std::pair<Scenario, const char*> kNames[] = {
    {Scenario::IonPhoton, "ion_photon"}, {Scenario::PostQfc, "post_qfc"},
    {Scenario::TiQm, "ti_qm"},           {Scenario::Chsh, "chsh"},
    {Scenario::Budget, "budget"},        {Scenario::AfcSweep, "afc_sweep"},
    {Scenario::BandwidthSweep, "bandwidth_sweep"}};

}  // namespace

std::string scenario_name(Scenario s) {
  for (const auto& [k, n] : kNames) {
    if (k == s) return n;
  }
  return "unknown";
}

std::optional<Scenario> scenario_from_name(const std::string& name) {
  for (const auto& [k, n] : kNames) {
    if (name == n) return k;
  }
  return std::nullopt;
}

json merge_config(json base, const json& patch) {
  base.merge_patch(patch);
  return base;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

// Reads one JSON object, recording every problem instead of stopping at the
// first one.
std::string range_rule(double lo, double hi, bool open_lo) {
  char buf[96];
  if (hi == INFINITY) {
    std::snprintf(buf, sizeof buf, "must be %s %g", open_lo ? ">" : ">=", lo);
  } else {
    std::snprintf(buf, sizeof buf, "must lie in %c%g, %g]", open_lo ? '(' : '[', lo, hi);
  }
  return buf;
}

class Section {
 public:
  Section(const json& doc, const std::string& path, std::vector<std::string>& problems)
      : problems_(problems), path_(path) {
    const json* j = &doc;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!j->is_object() || !j->contains(part) || (*j)[part].is_null()) {
        problems_.push_back(path + ": section missing");
        j_ = nullptr;
        return;
      }
      j = &(*j)[part];
    }
    if (!j->is_object()) {
      problems_.push_back(path + ": must be an object");
      j_ = nullptr;
      return;
    }
    j_ = j;
  }

  explicit operator bool() const { return j_ != nullptr; }

  template <class T, class Ok>
  void get(const char* key, T& dst, Ok ok, const std::string& rule) {
    if (!j_) return;
    seen_.insert(key);
    if (!j_->contains(key) || (*j_)[key].is_null()) {
      problems_.push_back(path_ + "." + key + ": missing");
      return;
    }
    try {
      T v = (*j_)[key].get<T>();
      if (!ok(v)) {
        problems_.push_back(path_ + "." + key + ": " + rule);
        return;
      }
      dst = v;
    } catch (const json::exception&) {
      problems_.push_back(path_ + "." + key + ": wrong type");
    }
  }

  template <class T>
  void get(const char* key, T& dst) {
    get(key, dst, [](const T&) { return true; }, "");
  }

  void num(const char* key, double& dst, double lo, double hi, bool open_lo = false) {
    get(key, dst,
        [&](double v) { return std::isfinite(v) ? (open_lo ? v > lo : v >= lo) && v <= hi : hi == INFINITY && v == hi; },
        range_rule(lo, hi, open_lo));
  }

  void positive(const char* key, double& dst) { num(key, dst, 0.0, INFINITY, true); }
  void prob(const char* key, double& dst) { num(key, dst, 0.0, 1.0); }
  void prob_open(const char* key, double& dst) { num(key, dst, 0.0, 1.0, true); }

  template <class T>
  void optional(const char* key, std::optional<T>& dst) {
    if (!j_) return;
    seen_.insert(key);
    if (!j_->contains(key) || (*j_)[key].is_null()) {
      dst.reset();
      return;
    }
    try {
      dst = (*j_)[key].get<T>();
    } catch (const json::exception&) {
      problems_.push_back(path_ + "." + key + ": wrong type");
    }
  }

  const json* raw(const char* key) {
    if (!j_) return nullptr;
    seen_.insert(key);
    if (!j_->contains(key) || (*j_)[key].is_null()) return nullptr;
    return &(*j_)[key];
  }

  ~Section() {
    if (!j_) return;
    for (const auto& [k, v] : j_->items()) {
      if (!seen_.count(k)) problems_.push_back(path_ + "." + k + ": unknown field");
    }
  }

 private:
  std::vector<std::string>& problems_;
  std::string path_;
  const json* j_ = nullptr;
  std::set<std::string> seen_;
};

template <class F>
void guarded(std::vector<std::string>& problems, const std::string& what, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    problems.push_back(what + ": " + e.what());
  }
}

void read_sweep(Section& s, const char* key, SweepRange& dst, std::vector<std::string>& problems,
                const std::string& path) {
  std::vector<double> v;
  s.get(key, v, [](const std::vector<double>& x) { return x.size() == 3; }, "expected [start, stop, step]");
  if (v.size() != 3) return;
  if (!(v[2] > 0.0) || !(v[1] >= v[0]) || (v[1] - v[0]) / v[2] > 1e6) {
    problems.push_back(path + "." + key + ": need start <= stop, step > 0 and at most 1e6 points");
    return;
  }
  dst = {v[0], v[1], v[2]};
}

}  // namespace

ExperimentConfig load_config(const json& doc, const std::vector<fs::path>& search_dirs) {
  std::vector<std::string> problems;
  ExperimentConfig c;
  c.pump = memory::default_pump_config();
  if (!doc.is_object()) throw ConfigError({"config: document must be a JSON object"});

  std::string scen;
  std::uint64_t seed = 0;
  std::string out;
  auto top_get = [&](const char* key) -> const json* {
    return doc.contains(key) && !doc[key].is_null() ? &doc[key] : nullptr;
  };
  const std::set<std::string> known_top{"scenario", "master_seed", "output_dir", "format", "bootstrap_resamples",
                                        "threads", "ion", "spam", "jitter", "noise", "errors", "qfc", "storage",
                                        "comb", "spectral", "stark", "pump", "link", "scenarios", "sweeps"};
  for (const auto& [k, v] : doc.items()) {
    if (!known_top.count(k)) problems.push_back(k + ": unknown field");
  }

  if (const json* j = top_get("scenario"); j && j->is_string()) {
    scen = j->get<std::string>();
    if (auto s = scenario_from_name(scen)) {
      c.scenario = *s;
    } else {
      problems.push_back("scenario: unknown scenario '" + scen + "'");
    }
  } else {
    problems.push_back("scenario: missing");
  }
  if (const json* j = top_get("master_seed"); j && j->is_number_integer()) {
    seed = j->is_number_unsigned() ? j->get<std::uint64_t>() : static_cast<std::uint64_t>(j->get<std::int64_t>());
    c.master_seed = seed;
  } else {
    problems.push_back("master_seed: missing or not an integer (an explicit seed is required)");
  }
  if (const json* j = top_get("output_dir"); j && j->is_string()) {
    c.output_dir = j->get<std::string>();
  } else {
    problems.push_back("output_dir: missing");
  }
  if (const json* j = top_get("format"); j && j->is_string() &&
                                         (j->get<std::string>() == "json" || j->get<std::string>() == "csv")) {
    c.format = j->get<std::string>();
  } else {
    problems.push_back("format: must be \"json\" or \"csv\"");
  }
  if (const json* j = top_get("bootstrap_resamples"); j && j->is_number_integer() && j->get<int>() >= 100) {
    c.bootstrap_resamples = j->get<int>();
  } else {
    problems.push_back("bootstrap_resamples: must be an integer >= 100");
  }
  if (const json* j = top_get("threads"); j && j->is_number_integer() && j->get<int>() >= 0) {
    c.threads = j->get<int>();
  } else {
    problems.push_back("threads: must be an integer >= 0");
  }
  if (!problems.empty() && !scenario_from_name(scen)) throw ConfigError(problems);

  const Scenario sc = c.scenario;
  const bool tomo = sc == Scenario::IonPhoton || sc == Scenario::PostQfc || sc == Scenario::TiQm || sc == Scenario::Chsh;
  const bool all = sc == Scenario::Budget;
  auto need = [&](bool cond, const char* section) { return cond || (doc.contains(section) && !doc[section].is_null()); };

  if (need(tomo || all, "ion")) {
    Section s(doc, "ion", problems);
    double f_mhz = c.ion.zeeman_omega / (2e6 * std::numbers::pi);
    s.positive("zeeman_freq_mhz", f_mhz);
    s.positive("coherence_time_ms", c.ion.coherence_time_ms);
    s.positive("lifetime_spectral_ns", c.ion.excited_lifetime_spectral_ns);
    s.positive("lifetime_temporal_ns", c.ion.excited_lifetime_temporal_ns);
    s.prob_open("branching_s12", c.ion.branching_s12);
    s.prob_open("pi_excitation_prob", c.ion.pi_excitation_prob);
    c.ion.zeeman_omega = 2e6 * std::numbers::pi * f_mhz;
    c.jitter.zeeman_omega = c.ion.zeeman_omega;
    c.errors.ion = c.ion;
  }
  if (need(all, "spam")) {
    Section s(doc, "spam", problems);
    s.positive("mean_bright_counts", c.spam.mean_bright_counts);
    s.num("threshold", c.spam.threshold, 0.0, 1e6);
    s.prob_open("dark_fidelity", c.spam.dark_fidelity);
    s.prob_open("bright_fidelity", c.spam.bright_fidelity);
    if (s) guarded(problems, "spam", [&] { c.spam = ion::calibrate_spam(c.spam); });
  }
  if (need(tomo || all, "jitter")) {
    Section s(doc, "jitter", problems);
    s.num("awg_rms_ns", c.jitter.awg_rms_ns, 0.0, 1e6);
    s.num("transceiver_rms_ns", c.jitter.transceiver_rms_ns, 0.0, 1e6);
    c.errors.jitter = c.jitter;
  }
  if (need(tomo || all, "noise")) {
    Section s(doc, "noise", problems);
    s.positive("snr", c.noise.snr);
    s.num("pbs_extinction", c.noise.pbs_extinction, 1.0, INFINITY, true);
    s.num("window_ns", c.noise.window_ns, 0.0, 1e6);
    s.positive("lifetime_ns", c.noise.lifetime_ns);
    s.num("signal_rate_hz", c.signal_rate_hz, 0.0, 1e12);
    s.num("noise_rate_hz", c.noise_rate_hz, 0.0, 1e12);
    c.errors.snr = c.noise.snr;
    c.errors.pbs_extinction = c.noise.pbs_extinction;
  }
  if (need(tomo || all, "errors")) {
    Section s(doc, "errors", problems);
    s.num("spam", c.errors.spam, 0.0, 0.75);
    s.num("mw_rotation", c.errors.mw_rotation, 0.0, 0.75);
    s.num("excitation", c.errors.excitation, 0.0, 0.75);
    s.num("pi_collection", c.errors.pi_collection, 0.0, 0.75);
    s.num("mw_propagation_us", c.errors.mw_propagation_us, 0.0, 1e6);
    s.num("detection_delay_us", c.errors.detection_delay_us, 0.0, 1e6);
  }
  const bool wants_qfc = sc == Scenario::PostQfc || sc == Scenario::TiQm || sc == Scenario::Chsh || all;
  if (need(wants_qfc, "qfc")) {
    Section s(doc, "qfc", problems);
    std::optional<std::string> file;
    std::optional<double> fid;
    s.optional("process_matrix_file", file);
    s.optional("process_fidelity", fid);
    if (s) {
      if (file && fid) {
        problems.push_back("qfc: give either process_matrix_file or process_fidelity, not both");
      } else if (file) {
        fs::path p(*file);
        std::optional<fs::path> found;
        if (p.is_absolute()) {
          if (fs::exists(p)) found = p;
        } else {
          for (const auto& d : search_dirs) {
            if (fs::exists(d / p)) {
              found = d / p;
              break;
            }
          }
        }
        if (!found) {
          problems.push_back("qfc.process_matrix_file: cannot find '" + *file + "'");
        } else {
          try {
            std::ifstream in(*found);
            c.qfc_chi = photon::process_matrix_from_json(json::parse(in));
          } catch (const std::exception& e) {
            problems.push_back("qfc.process_matrix_file: " + std::string(e.what()));
          }
        }
      } else if (fid) {
        if (*fid < 0.0 || *fid > 1.0) {
          problems.push_back("qfc.process_fidelity: must lie in [0, 1]");
        } else {
          c.qfc_chi = photon::ProcessMatrix::depolarizing(*fid);
        }
      } else {
        problems.push_back("qfc: need process_matrix_file or process_fidelity");
      }
      if (c.qfc_chi) c.errors.qfc_process_fidelity = photon::process_fidelity(*c.qfc_chi, photon::ProcessMatrix::identity());
    }
  }
  const bool wants_storage = sc == Scenario::TiQm || sc == Scenario::Chsh || all;
  if (need(wants_storage, "storage")) {
    Section s(doc, "storage", problems);
    s.prob("eta_h", c.storage.eta_h);
    s.prob("eta_v", c.storage.eta_v);
    std::vector<double> probes;
    s.get("probe_fidelities", probes,
          [](const std::vector<double>& v) {
            return v.size() == 4 && std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0 && x <= 1.0; });
          },
          "expected four fidelities in [0, 1]");
    if (probes.size() == 4) {
      std::copy(probes.begin(), probes.end(), c.errors.storage_probe_fidelities.begin());
      c.storage.residual_infidelity = memory::mean_probe_infidelity(c.errors.storage_probe_fidelities);
      if (c.storage.residual_infidelity > 0.5) problems.push_back("storage.probe_fidelities: mean below 0.5");
    }
  }
  if (need(all || sc == Scenario::AfcSweep, "comb")) {
    Section s(doc, "comb", problems);
    s.positive("d", c.comb.d);
    s.optional("finesse", c.comb.finesse);
    s.num("gamma_comb_khz", c.comb.gamma_comb_khz, 0.0, 1e9);
    s.optional("delta_mhz", c.comb.delta_mhz);
    s.positive("bandwidth_mhz", c.comb.bandwidth_mhz);
    if (s) guarded(problems, "comb", [&] { c.comb.validate(); });
  }
  if (need(all || sc == Scenario::BandwidthSweep, "spectral")) {
    Section s(doc, "spectral", problems);
    s.positive("gamma_natural_mhz", c.spectral.gamma_natural_mhz);
    s.num("zeeman_split_mhz", c.spectral.zeeman_split_mhz, 0.0, 1e9);
    s.num("qm_bandwidth_mhz", c.spectral.qm_bandwidth_mhz, 0.0, INFINITY, true);
    s.num("detuning_mhz", c.spectral.detuning_mhz, -1e9, 1e9);
  }
  if (need(all, "stark")) {
    Section s(doc, "stark", problems);
    s.positive("shift_rate_khz_per_v_cm", c.stark.shift_rate_khz_per_v_cm);
    s.num("pulse_voltage_v", c.stark.pulse_voltage_v, -1e6, 1e6);
    s.positive("pulse_duration_ns", c.stark.pulse_duration_ns);
    s.positive("echo_period_ns", c.stark.echo_period_ns);
    s.get("readout_order_n", c.stark.readout_order_n,
          [](int n) { return n >= 1 && n <= memory::kMaxReadoutOrder; }, "must lie in [1, 10]");
    s.num("first_pulse_start_ns", c.stark.first_pulse_start_ns, 0.0, 1e9);
    s.optional("second_pulse_start_ns", c.stark.second_pulse_start_ns);
    s.get("second_pulse_reversed", c.stark.second_pulse_reversed);
    if (s) guarded(problems, "stark", [&] { memory::smafc_readout_time(c.stark); });
  }
  if (need(all, "pump")) {
    Section s(doc, "pump", problems);
    s.positive("native_d_h", c.native_d_h);
    s.positive("native_d_v", c.native_d_v);
    if (s) {
      json pj = json::object();
      for (const char* k : {"classes", "pump_windows", "target", "broadening_mhz", "partial_weight"}) {
        if (const json* v = s.raw(k)) pj[k] = *v;
      }
      guarded(problems, "pump", [&] {
        try {
          c.pump = memory::pump_config_from_json(pj);
        } catch (const json::exception& e) {
          throw ParameterError(e.what());
        }
        memory::plan_pump_regions(c.pump);
      });
    }
  }
  if (need(all, "link")) {
    Section s(doc, "link", problems);
    auto& t = c.link;
    s.positive("branching_prefactor", t.two_thirds);
    s.prob_open("p_pi", t.p_pi);
    s.prob_open("p_s12", t.p_s12);
    s.positive("r_exp1_hz", t.r_exp1_hz);
    s.prob_open("qe_369", t.qe_369);
    s.prob_open("t_fib1", t.t_fib1);
    s.prob_open("t_opt", t.t_opt);
    s.prob_open("e_obj", t.e_obj);
    s.positive("r_exp2_hz", t.r_exp2_hz);
    s.prob_open("qe_580", t.qe_580);
    s.prob_open("eta_369", t.eta_369);
    std::vector<double> conv;
    auto pair_ok = [](const std::vector<double>& v) {
      return v.size() == 2 && v[0] > 0.0 && v[0] <= 1.0 && v[1] > 0.0 && v[1] <= 1.0;
    };
    s.get("eta_conv_hv", conv, pair_ok, "expected [eta_H, eta_V] in (0, 1]");
    if (conv.size() == 2) t.eta_conv = {conv[0], conv[1]};
    s.prob_open("t_580", t.t_580);
    s.prob_open("t_fib2", t.t_fib2);
    s.prob_open("eta_aom", t.eta_aom);
    s.positive("r_exp3_hz", t.r_exp3_hz);
    s.prob_open("eta_bw", t.eta_bw);
    std::vector<double> stor;
    s.get("eta_storage_hv", stor, pair_ok, "expected [eta_H, eta_V] in (0, 1]");
    if (stor.size() == 2) t.eta_storage = {stor[0], stor[1]};
  }
  if (doc.contains("scenarios") && doc["scenarios"].is_object()) {
    for (const auto& [k, v] : doc["scenarios"].items()) {
      if (k != "ion_photon" && k != "post_qfc" && k != "ti_qm" && k != "chsh") {
        problems.push_back("scenarios." + k + ": unknown field");
      }
    }
  }
  if (need(sc == Scenario::Chsh, "scenarios") && sc == Scenario::Chsh) {
    Section s(doc, "scenarios.chsh", problems);
    s.get("heralds", c.chsh.heralds, [](long long n) { return n >= 4; }, "must be >= 4");
    s.get("source", c.chsh.source,
          [](const std::string& v) { return v == "ion_photon" || v == "post_qfc" || v == "ti_qm"; },
          "must name a tomography scenario");
    s.get("settings", c.chsh.settings, [](const std::string& v) { return v == "xz" || v == "optimal"; },
          "must be \"xz\" or \"optimal\"");
    s.num("theta_b0", c.chsh.theta_b0, -1e3, 1e3);
    s.num("theta_b1", c.chsh.theta_b1, -1e3, 1e3);
  }
  for (const char* name : {"ion_photon", "post_qfc", "ti_qm"}) {
    const bool needed = scen == name || (sc == Scenario::Chsh && c.chsh.source == name) || all;
    const bool present = doc.contains("scenarios") && doc["scenarios"].is_object() &&
                         doc["scenarios"].contains(name) && !doc["scenarios"][name].is_null();
    if (!needed && !present) continue;
    Section s(doc, std::string("scenarios.") + name, problems);
    TomographyRun r;
    s.get("heralds", r.heralds, [](long long n) { return n >= 9; }, "must be >= 9");
    s.positive("snr", r.snr);
    s.num("delay_us", r.delay_us, 0.0, 1e6);
    s.get("qfc", r.qfc);
    s.get("storage", r.storage);
    s.get("pbs", r.pbs);
    c.tomography[name] = r;
  }
  if (need(sc == Scenario::AfcSweep || sc == Scenario::BandwidthSweep, "sweeps")) {
    Section s(doc, "sweeps", problems);
    read_sweep(s, "afc_t_us", c.afc_t_us, problems, "sweeps");
    read_sweep(s, "bandwidth_df_mhz", c.bandwidth_df_mhz, problems, "sweeps");
  }

  if (!problems.empty()) throw ConfigError(problems);
  return c;
}

link::PipelineParams pipeline_params(const ExperimentConfig& cfg, const std::string& which) {
  const auto it = cfg.tomography.find(which);
  if (it == cfg.tomography.end()) throw ConfigError({"scenarios." + which + ": section missing"});
  const TomographyRun& r = it->second;
  link::PipelineParams p;
  p.ion = cfg.ion;
  p.jitter = cfg.jitter;
  p.delay_us = r.delay_us;
  p.mw_propagation_us = cfg.errors.mw_propagation_us;
  p.excitation_error = cfg.errors.excitation;
  p.pi_collection_error = cfg.errors.pi_collection;
  p.spam_error = cfg.errors.spam;
  p.mw_rotation_error = cfg.errors.mw_rotation;
  p.snr = r.snr;
  if (r.qfc) {
    if (!cfg.qfc_chi) throw ConfigError({"qfc: section missing for scenario " + which});
    p.qfc = cfg.qfc_chi;
  }
  if (r.storage) p.storage = cfg.storage;
  if (r.pbs) {
    p.pbs_extinction = cfg.noise.pbs_extinction;
  } else {
    p.pbs_extinction.reset();
  }
  return p;
}

// ---------------------------------------------------------------------------
// Running

namespace {

std::string csv_line(std::initializer_list<double> values) {
  std::string out;
  char buf[40];
  bool first = true;
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.15g", v);
    if (!first) out += ',';
    out += buf;
    first = false;
  }
  return out + "\n";
}

void run_tomography(const ExperimentConfig& cfg, const std::string& which, RunReport& rep) {
  const link::PipelineResult pipe = link::run_pipeline(pipeline_params(cfg, which));
  const long long heralds = cfg.tomography.at(which).heralds;
  const double snr = cfg.tomography.at(which).snr;
  const CounterRng master(cfg.master_seed);

  const auto records = tomo::simulate_tomography(pipe.state, heralds, snr, master.child(0));
  const tomo::MleResult mle = tomo::mle_reconstruct(records);
  const tomo::Estimate boot = tomo::bootstrap_uncertainty(records, cfg.bootstrap_resamples,
                                                          tomo::fidelity_statistic(), master.child(1), cfg.threads);
  rep.heralds = heralds;
  rep.matrix = mle.rho.matrix();
  rep.fidelity = Stat{fidelity(mle.rho, bell_state(0.0)), boot.stddev};
  rep.analytic_fidelity = Stat::exact(pipe.fidelity);
  if (pipe.herald_probability < 1.0) rep.herald_probability = Stat::exact(pipe.herald_probability);
  rep.channels = pipe.stages;
  rep.analytic["bootstrap_mean_fidelity"] = boot.mean;
  rep.analytic["mle_iterations"] = mle.iterations;
  rep.analytic["snr"] = snr;

  std::ostringstream counts;
  tomo::write_counts_csv(records, counts);
  rep.tables["counts"] = counts.str();
}

void run_chsh(const ExperimentConfig& cfg, RunReport& rep) {
  const link::PipelineResult pipe = link::run_pipeline(pipeline_params(cfg, cfg.chsh.source));
  const double snr = cfg.tomography.at(cfg.chsh.source).snr;
  const tomo::ChshSettings settings = cfg.chsh.settings == "optimal"
                                          ? tomo::optimal_chsh_settings(pipe.measured)
                                          : tomo::ChshSettings::xz(cfg.chsh.theta_b0, cfg.chsh.theta_b1);
  const CounterRng master(cfg.master_seed);
  const long long per_pair = cfg.chsh.heralds / 4;
  const auto pairs = tomo::simulate_chsh_counts(pipe.state, settings, per_pair, snr, master.child(2));
  const double s_mc = tomo::chsh_from_counts(pairs);

  // Resample the four correlator histograms.
  const CounterRng boot_rng = master.child(3);
  const int n = cfg.bootstrap_resamples;
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    CounterRng r = boot_rng.child(static_cast<std::uint64_t>(i));
    std::array<tomo::CountRecord, 4> re = pairs;
    for (int k = 0; k < 4; ++k) {
      std::array<double, 4> p{};
      for (int o = 0; o < 4; ++o) p[o] = pairs[k].counts[o] / pairs[k].shots;
      CounterRng rk = r.child(static_cast<std::uint64_t>(k));
      const auto drawn = sample_multinomial(per_pair, p, rk);
      for (int o = 0; o < 4; ++o) re[k].counts[o] = static_cast<double>(drawn[o]);
    }
    const double s = tomo::chsh_from_counts(re);
    const double d = s - mean;
    mean += d / (i + 1);
    m2 += d * (s - mean);
  }

  rep.heralds = per_pair * 4;
  rep.chsh = Stat{s_mc, std::sqrt(m2 / (n - 1))};
  rep.analytic_fidelity = Stat::exact(pipe.fidelity);
  rep.channels = pipe.stages;
  rep.analytic["source"] = cfg.chsh.source;
  rep.analytic["settings"] = cfg.chsh.settings;
  rep.analytic["chsh_exact"] = tomo::chsh(pipe.measured, settings);
  rep.analytic["chsh_max"] = tomo::max_chsh(pipe.measured);
  rep.analytic["chsh_werner_equivalent"] = tomo::werner_equivalent_chsh(pipe.fidelity);
  rep.analytic["werner_visibility"] = (4.0 * pipe.fidelity - 1.0) / 3.0;

  std::string t = "pair,n_pp,n_pm,n_mp,n_mm\n";
  const char* names[4] = {"A0B0", "A0B1", "A1B0", "A1B1"};
  for (int k = 0; k < 4; ++k) {
    t += std::string(names[k]) + "," +
         csv_line({pairs[k].counts[0], pairs[k].counts[1], pairs[k].counts[2], pairs[k].counts[3]});
  }
  rep.tables["chsh_counts"] = t;
}

void run_budget(const ExperimentConfig& cfg, RunReport& rep) {
  using budget::Polarization;
  const auto h = budget::rate_summary(cfg.link, Polarization::H);
  const auto v = budget::rate_summary(cfg.link, Polarization::V);
  const auto a = budget::rate_summary(cfg.link, Polarization::Average);
  auto rates_json = [](const budget::RateSummary& r) {
    return json{{"R_369_hz", r.r369_hz}, {"eta_qfc", r.eta_qfc}, {"R_580_hz", r.r580_hz},
                {"eta_qm", r.eta_qm},    {"R_TI_QM_hz", r.r_ti_qm_hz}, {"eta_overall", r.eta_overall}};
  };
  rep.analytic["rates"] = {{"H", rates_json(h)}, {"V", rates_json(v)}, {"average", rates_json(a)}};

  std::string rt = "quantity,H,V,average\n";
  auto row = [&](const char* name, double x, double y, double z) { rt += std::string(name) + "," + csv_line({x, y, z}); };
  row("R_369_hz", h.r369_hz, v.r369_hz, a.r369_hz);
  row("eta_qfc", h.eta_qfc, v.eta_qfc, a.eta_qfc);
  row("R_580_hz", h.r580_hz, v.r580_hz, a.r580_hz);
  row("eta_qm", h.eta_qm, v.eta_qm, a.eta_qm);
  row("R_TI_QM_hz", h.r_ti_qm_hz, v.r_ti_qm_hz, a.r_ti_qm_hz);
  row("eta_overall", h.eta_overall, v.eta_overall, a.eta_overall);
  rep.tables["rates"] = rt;

  const auto published = budget::published_error_ledger();
  budget::ErrorModelInputs in = cfg.errors;
  in.detection_delay_us = cfg.tomography.count("ti_qm") ? cfg.tomography.at("ti_qm").delay_us : in.detection_delay_us;
  const auto model = budget::model_error_ledger(in);
  std::ostringstream ledger;
  budget::write_ledger_csv(published, model, ledger);
  rep.tables["budget"] = ledger.str();
  json rows = json::array();
  for (size_t i = 0; i < published.size(); ++i) {
    rows.push_back({{"source", published[i].name}, {"published", published[i].infidelity}, {"model", model[i].infidelity}});
  }
  rep.analytic["ledger"] = rows;
  rep.analytic["total_infidelity"] = {
      {"published_sum", budget::total_infidelity(published)},
      {"published_product", budget::total_infidelity(published, budget::Composition::Product)},
      {"model_sum", budget::total_infidelity(model)},
      {"model_product", budget::total_infidelity(model, budget::Composition::Product)}};

  const auto snr = budget::snr_and_noise_rate(cfg.signal_rate_hz, cfg.noise_rate_hz);
  rep.analytic["snr"] = {{"snr", snr.infinite ? json(nullptr) : json(snr.snr)},
                         {"infinite", snr.infinite},
                         {"noise_fraction", snr.noise_fraction}};
  rep.analytic["jitter"] = {{"t_total_rms_ns", photon::jitter_total_rms(cfg.jitter)},
                            {"delta_phi_rad", photon::jitter_phase_rms(cfg.jitter)}};
  rep.analytic["detection_window_efficiency"] = photon::window_efficiency(cfg.noise);
  rep.analytic["spam"] = {{"dark_error", ion::dark_error_probability(cfg.spam)},
                          {"bright_error", ion::bright_error_probability(cfg.spam)},
                          {"leak_per_scatter", cfg.spam.leak_per_scatter},
                          {"dark_background_mean", cfg.spam.dark_background_mean}};

  const memory::PumpPlan plan = memory::plan_pump_regions(cfg.pump);
  rep.analytic["memory"] = {
      {"afc_efficiency_500ns", memory::afc_efficiency(cfg.comb, 500.0)},
      {"afc_efficiency_1000ns", memory::afc_efficiency(cfg.comb, 1000.0)},
      {"bandwidth_match", memory::bandwidth_match(cfg.spectral)},
      {"smafc_readout_ns", memory::smafc_readout_time(cfg.stark)},
      {"stark_splitting_khz_at_100_v_cm", memory::stark_splitting(100.0, cfg.stark.shift_rate_khz_per_v_cm)},
      {"pump_enhancement", plan.enhancement},
      {"effective_d_h", memory::effective_depth(plan, cfg.native_d_h)},
      {"effective_d_v", memory::effective_depth(plan, cfg.native_d_v)}};
  std::ostringstream pump;
  memory::write_pump_csv(plan, pump);
  rep.tables["pump"] = pump.str();

  if (cfg.tomography.count("ti_qm")) {
    const auto pipe = link::run_pipeline(pipeline_params(cfg, "ti_qm"));
    rep.analytic_fidelity = Stat::exact(pipe.fidelity);
    rep.channels = pipe.stages;
  }
}

void run_afc_sweep(const ExperimentConfig& cfg, RunReport& rep) {
  std::string t = "t_us,efficiency\n";
  const auto& r = cfg.afc_t_us;
  const long long n = std::llround(std::floor((r.stop - r.start) / r.step + 1e-9)) + 1;
  double peak = 0.0;
  for (long long i = 0; i < n; ++i) {
    const double t_us = r.start + static_cast<double>(i) * r.step;
    const double eta = memory::afc_efficiency(cfg.comb, t_us * 1e3);
    peak = std::max(peak, eta);
    t += csv_line({t_us, eta});
  }
  rep.tables["sweep"] = t;
  rep.analytic["points"] = n;
  rep.analytic["efficiency_t0"] = memory::afc_efficiency(cfg.comb, 0.0);
  rep.analytic["efficiency_max_on_grid"] = peak;
}

void run_bandwidth_sweep(const ExperimentConfig& cfg, RunReport& rep) {
  std::string t = "detuning_mhz,eta_bw\n";
  const auto& r = cfg.bandwidth_df_mhz;
  const long long n = std::llround(std::floor((r.stop - r.start) / r.step + 1e-9)) + 1;
  double peak = 0.0;
  double peak_at = 0.0;
  for (long long i = 0; i < n; ++i) {
    memory::SpectralModel m = cfg.spectral;
    m.detuning_mhz = r.start + static_cast<double>(i) * r.step;
    const double eta = memory::bandwidth_match(m);
    if (eta > peak) {
      peak = eta;
      peak_at = m.detuning_mhz;
    }
    t += csv_line({m.detuning_mhz, eta});
  }
  rep.tables["sweep"] = t;
  rep.analytic["points"] = n;
  rep.analytic["eta_bw_peak"] = peak;
  rep.analytic["eta_bw_peak_detuning_mhz"] = peak_at;
}

}  // namespace

RunReport run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.scenario = scenario_name(cfg.scenario);
  rep.seed = cfg.master_seed;
  switch (cfg.scenario) {
    case Scenario::IonPhoton:
    case Scenario::PostQfc:
    case Scenario::TiQm: run_tomography(cfg, rep.scenario, rep); break;
    case Scenario::Chsh: run_chsh(cfg, rep); break;
    case Scenario::Budget: run_budget(cfg, rep); break;
    case Scenario::AfcSweep: run_afc_sweep(cfg, rep); break;
    case Scenario::BandwidthSweep: run_bandwidth_sweep(cfg, rep); break;
  }
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

json round_all(const json& j) {
  if (j.is_number_float()) return round_sig15(j.get<double>());
  if (j.is_array() || j.is_object()) {
    json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = round_all(*it);
    return out;
  }
  return j;
}

json stat_json(const std::optional<Stat>& s) {
  if (!s) return nullptr;
  if (s->stddev) return {{"value", s->value}, {"stddev", *s->stddev}};
  return {{"value", s->value}, {"uncertainty", "exact"}};
}

}  // namespace

json summary_json(const RunReport& r) {
  json j;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["heralds"] = r.heralds ? json(*r.heralds) : json(nullptr);
  j["fidelity"] = stat_json(r.fidelity);
  j["analytic_fidelity"] = stat_json(r.analytic_fidelity);
  j["chsh"] = stat_json(r.chsh);
  j["herald_probability"] = stat_json(r.herald_probability);
  j["matrix"] = r.matrix ? matrix_to_json(*r.matrix) : json(nullptr);
  if (r.channels.empty()) {
    j["channels"] = nullptr;
  } else {
    json ch = json::array();
    double prev = 1.0;
    for (const auto& s : r.channels) {
      ch.push_back({{"stage", s.name},
                    {"fidelity", {{"value", s.fidelity}, {"uncertainty", "exact"}}},
                    {"infidelity_added", {{"value", prev - s.fidelity}, {"uncertainty", "exact"}}}});
      prev = s.fidelity;
    }
    j["channels"] = ch;
  }
  json an = json::object();
  for (const auto& [k, v] : r.analytic.items()) an[k] = v;
  j["analytic"] = an;
  j["analytic_uncertainty"] = "exact";
  return round_all(j);
}

std::vector<fs::path> emit_report(const RunReport& r, const std::string& format, const fs::path& dir) {
  if (format != "json" && format != "csv") throw ParameterError("emit_report: format must be json or csv");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("emit_report: cannot create " + dir.string() + ": " + ec.message());
  const std::string stem = r.scenario + "_seed" + std::to_string(r.seed);
  std::vector<fs::path> written;
  auto write = [&](const std::string& name, const std::string& content) {
    const fs::path p = dir / (stem + "." + name);
    std::ofstream out(p, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw std::runtime_error("emit_report: cannot write " + p.string());
    written.push_back(p);
  };

  const json summary = summary_json(r);
  if (format == "json") {
    write("summary.json", summary.dump(2) + "\n");
  } else {
    std::string csv = "key,value,stddev\n";
    for (const char* k : {"fidelity", "analytic_fidelity", "chsh", "herald_probability"}) {
      const json& s = summary[k];
      if (s.is_null()) {
        csv += std::string(k) + ",,\n";
      } else {
        csv += std::string(k) + "," + s["value"].dump() + "," +
               (s.contains("stddev") ? s["stddev"].dump() : std::string("exact")) + "\n";
      }
    }
    write("summary.csv", csv);
  }
  if (r.matrix) write("matrix.json", round_all(matrix_to_json(*r.matrix)).dump(2) + "\n");
  for (const auto& [name, content] : r.tables) write(name + ".csv", content);

  char buf[64];
  std::snprintf(buf, sizeof buf, "{\n  \"runtime_s\": %.6f\n}\n", r.runtime_s);
  write("timing.json", buf);
  return written;
}

}  // namespace hetlink::scenario
