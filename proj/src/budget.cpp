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

#include "hetlink/budget.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "hetlink/memory.hpp"

namespace hetlink::budget {

namespace {

void check_efficiency(double v, const std::string& what) {
  if (!(v > 0.0 && v <= 1.0)) throw ParameterError(what + ": efficiency must lie in (0, 1]");
}

EfficiencyStage stage(std::string name, double v) { return {std::move(name), v, std::nullopt}; }

EfficiencyStage stage(std::string name, std::pair<double, double> hv) {
  return {std::move(name), 0.5 * (hv.first + hv.second), hv};
}

}  // namespace

void EfficiencyStage::validate() const {
  check_efficiency(value, "EfficiencyStage " + name);
  if (hv) {
    check_efficiency(hv->first, "EfficiencyStage " + name + " (H)");
    check_efficiency(hv->second, "EfficiencyStage " + name + " (V)");
  }
}

double EfficiencyStage::at(Polarization pol) const {
  if (!hv) return value;
  switch (pol) {
    case Polarization::H: return hv->first;
    case Polarization::V: return hv->second;
    case Polarization::Average: break;
  }
  return 0.5 * (hv->first + hv->second);
}

void RateChain::validate() const {
  if (!(repetition_rate_hz > 0.0)) throw ParameterError("RateChain " + name + ": repetition rate must be > 0");
  if (stages.empty() && prefactors.empty()) throw ParameterError("RateChain " + name + ": empty chain");
  for (const auto& s : stages) s.validate();
  for (const auto& p : prefactors) {
    if (!(p.value > 0.0) || !std::isfinite(p.value)) {
      throw ParameterError("RateChain " + name + ": prefactor " + p.name + " must be finite and > 0");
    }
  }
}

double rate(const RateChain& chain, Polarization pol) {
  chain.validate();
  double r = chain.repetition_rate_hz;
  for (const auto& p : chain.prefactors) r *= p.value;
  for (const auto& s : chain.stages) r *= s.at(pol);
  return r;
}

double end_to_end_efficiency(const std::vector<EfficiencyStage>& stages, Polarization pol) {
  if (stages.empty()) throw ParameterError("end_to_end_efficiency: no stages");
  double eta = 1.0;
  for (const auto& s : stages) {
    s.validate();
    eta *= s.at(pol);
  }
  return eta;
}

void ErrorSource::validate() const {
  if (!(infidelity >= 0.0 && infidelity <= 1.0)) {
    throw ParameterError("ErrorSource " + name + ": infidelity outside [0, 1]");
  }
}

double total_infidelity(const std::vector<ErrorSource>& sources, Composition mode) {
  if (sources.empty()) throw ParameterError("total_infidelity: no sources");
  double sum = 0.0;
  double keep = 1.0;
  for (const auto& s : sources) {
    s.validate();
    sum += s.infidelity;
    keep *= 1.0 - s.infidelity;
  }
  return mode == Composition::Sum ? sum : 1.0 - keep;
}

SnrResult snr_and_noise_rate(double signal_rate_hz, double noise_rate_hz) {
  if (!(signal_rate_hz >= 0.0) || !(noise_rate_hz >= 0.0)) {
    throw ParameterError("snr_and_noise_rate: rates must be >= 0");
  }
  if (noise_rate_hz == 0.0) return {std::numeric_limits<double>::infinity(), 0.0, true};
  const double snr = signal_rate_hz / noise_rate_hz;
  return {snr, 1.0 / (snr + 1.0), false};
}

// ---------------------------------------------------------------------------

void LinkTables::validate() const {
  for (double r : {r_exp1_hz, r_exp2_hz, r_exp3_hz}) {
    if (!(r > 0.0)) throw ParameterError("LinkTables: repetition rates must be > 0");
  }
  for (double v : {p_pi, p_s12, qe_369, t_fib1, t_opt, e_obj, qe_580, eta_369, eta_conv.first, eta_conv.second,
                   t_580, t_fib2, eta_aom, eta_bw, eta_storage.first, eta_storage.second}) {
    check_efficiency(v, "LinkTables");
  }
  if (!(two_thirds > 0.0)) throw ParameterError("LinkTables: branching prefactor must be > 0");
}

std::vector<EfficiencyStage> qfc_stages(const LinkTables& t) {
  return {stage("eta_369", t.eta_369), stage("eta_conv", t.eta_conv), stage("T_580", t.t_580),
          stage("T_fib2", t.t_fib2), stage("eta_AOM", t.eta_aom)};
}

std::vector<EfficiencyStage> qm_stages(const LinkTables& t) {
  return {stage("eta_bw", t.eta_bw), stage("eta_storage", t.eta_storage)};
}

RateChain r369_chain(const LinkTables& t) {
  t.validate();
  return {"R_369",
          t.r_exp1_hz,
          {{"sigma_branching", t.two_thirds}, {"P_pi", t.p_pi}, {"P_S1/2", t.p_s12}},
          {stage("QE_369", t.qe_369), stage("T_fib1", t.t_fib1), stage("T_opt", t.t_opt),
           stage("E_obj", t.e_obj)}};
}

RateChain r580_chain(const LinkTables& t) {
  RateChain c = r369_chain(t);
  c.name = "R_580";
  c.repetition_rate_hz = t.r_exp2_hz;
  c.stages.front() = stage("QE_580", t.qe_580);
  for (auto& s : qfc_stages(t)) c.stages.push_back(s);
  return c;
}

RateChain ti_qm_chain(const LinkTables& t) {
  RateChain c = r580_chain(t);
  c.name = "R_TI-QM";
  c.repetition_rate_hz = t.r_exp3_hz;
  for (auto& s : qm_stages(t)) c.stages.push_back(s);
  return c;
}

RateSummary rate_summary(const LinkTables& t, Polarization pol) {
  RateSummary s{};
  s.r369_hz = rate(r369_chain(t), pol);
  s.eta_qfc = end_to_end_efficiency(qfc_stages(t), pol);
  s.r580_hz = rate(r580_chain(t), pol);
  s.eta_qm = end_to_end_efficiency(qm_stages(t), pol);
  s.r_ti_qm_hz = rate(ti_qm_chain(t), pol);
  s.eta_overall = s.eta_qfc * s.eta_qm;
  return s;
}

// ---------------------------------------------------------------------------

std::vector<ErrorSource> published_error_ledger() {
  return {{"Ion decoherence", 2.6e-6, "published"},
          {"Photon arrival-time jitter", 1.2e-4, "published"},
          {"SPAM", 0.007, "published"},
          {"MW rotation", 0.001, "published"},
          {"QFC", 0.031, "published"},
          {"Pulse excitation", 0.033, "published"},
          {"Collection of pi photons", 0.005, "published"},
          {"Dark noise", 0.027, "published"},
          {"Photon-state detection", 2.9e-4, "published"},
          {"QM storage", 0.002, "published"}};
}

void ErrorModelInputs::validate() const {
  ion.validate();
  jitter.validate();
  if (detection_delay_us < 0.0 || mw_propagation_us < 0.0) {
    throw ParameterError("ErrorModelInputs: delays must be >= 0");
  }
  for (double e : {spam, mw_rotation, excitation, pi_collection}) {
    if (!(e >= 0.0 && e <= 0.75)) throw ParameterError("ErrorModelInputs: error rates outside [0, 0.75]");
  }
  if (!(qfc_process_fidelity >= 0.0 && qfc_process_fidelity <= 1.0)) {
    throw ParameterError("ErrorModelInputs: QFC process fidelity outside [0, 1]");
  }
  if (!(snr > 0.0)) throw ParameterError("ErrorModelInputs: snr must be > 0");
  if (!(pbs_extinction >= 1.0)) throw ParameterError("ErrorModelInputs: PBS extinction must be >= 1");
}

std::vector<ErrorSource> model_error_ledger(const ErrorModelInputs& in) {
  in.validate();
  const double t = in.detection_delay_us + in.mw_propagation_us;
  const double c = ion::coherence_factor(in.ion, t);
  const double dphi = photon::jitter_phase_rms(in.jitter);
  const double p_noise = photon::noise_fraction(in.snr);
  return {
      {"Ion decoherence", 0.5 * (1.0 - c), "(1 - exp(-(t/tau_co)^2)) / 2"},
      {"Photon arrival-time jitter", 0.5 * -std::expm1(-0.5 * dphi * dphi), "(1 - exp(-dPhi^2/2)) / 2"},
      {"SPAM", in.spam, "input"},
      {"MW rotation", in.mw_rotation, "input"},
      {"QFC", 1.0 - in.qfc_process_fidelity, "1 - F_process"},
      {"Pulse excitation", in.excitation, "input"},
      {"Collection of pi photons", in.pi_collection, "input"},
      {"Dark noise", 0.75 * p_noise, "3/4 * 1/(SNR+1)"},
      {"Photon-state detection", 1.0 / in.pbs_extinction, "1 / extinction"},
      {"QM storage", memory::mean_probe_infidelity(in.storage_probe_fidelities), "1 - mean probe fidelity"},
  };
}

void write_ledger_csv(const std::vector<ErrorSource>& published, const std::vector<ErrorSource>& model,
                      std::ostream& os) {
  if (published.size() != model.size()) throw ParameterError("write_ledger_csv: row count mismatch");
  os << "source,published_infidelity,model_infidelity,model_ref\n";
  char buf[256];
  for (size_t i = 0; i < published.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s,%.15g,%.15g,\"%s\"\n", published[i].name.c_str(), published[i].infidelity,
                  model[i].infidelity, model[i].model_ref.c_str());
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "Total (sum),%.15g,%.15g,\"sum\"\n", total_infidelity(published),
                total_infidelity(model));
  os << buf;
  std::snprintf(buf, sizeof buf, "Total (product),%.15g,%.15g,\"1 - prod(1 - e)\"\n",
                total_infidelity(published, Composition::Product), total_infidelity(model, Composition::Product));
  os << buf;
}

}  // namespace hetlink::budget
