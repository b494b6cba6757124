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

// Photon efficiency chains, entanglement rates and the infidelity ledger.

#ifndef HETLINK_BUDGET_HPP
#define HETLINK_BUDGET_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetlink/ion_node.hpp"
#include "hetlink/photon_chain.hpp"

namespace hetlink::budget {

enum class Polarization { Average, H, V };

struct EfficiencyStage {
  std::string name;
  double value = 1.0;
  std::optional<std::pair<double, double>> hv;  // (eta_H, eta_V)

  void validate() const;
  /// hv.first / hv.second for H / V, their mean for Average; `value` if no pair.
  double at(Polarization pol) const;
};

struct Prefactor {
  std::string name;
  double value = 1.0;
};

struct RateChain {
  std::string name;
  double repetition_rate_hz = 0.0;
  std::vector<Prefactor> prefactors;
  std::vector<EfficiencyStage> stages;

  void validate() const;
};

/// Repetition rate times all prefactors and stage values.
double rate(const RateChain& chain, Polarization pol = Polarization::Average);

/// Product of stage values.
double end_to_end_efficiency(const std::vector<EfficiencyStage>& stages,
                             Polarization pol = Polarization::Average);

struct ErrorSource {
  std::string name;
  double infidelity = 0.0;
  std::string model_ref;

  void validate() const;
};

enum class Composition { Sum, Product };

/// Sum of infidelities, or 1 - prod(1 - e_i).
double total_infidelity(const std::vector<ErrorSource>& sources, Composition mode = Composition::Sum);

struct SnrResult {
  double snr;             // +inf when noise_rate is 0
  double noise_fraction;  // 1 / (snr + 1)
  bool infinite;
};

SnrResult snr_and_noise_rate(double signal_rate_hz, double noise_rate_hz);

// ---------------------------------------------------------------------------
// Link tables

struct LinkTables {
  // R_369
  double two_thirds = 2.0 / 3.0;
  double p_pi = 0.960;
  double p_s12 = 0.995;
  double r_exp1_hz = 250e3;
  double qe_369 = 0.35;
  double t_fib1 = 0.27;
  double t_opt = 0.9;
  double e_obj = 0.0999;
  // R_580
  double r_exp2_hz = 194e3;
  double qe_580 = 0.8;
  double eta_369 = 0.708;
  std::pair<double, double> eta_conv{0.0070, 0.0075};
  double t_580 = 0.478;
  double t_fib2 = 0.4;
  double eta_aom = 0.8;
  // R_TI-QM
  double r_exp3_hz = 162e3;
  double eta_bw = 0.74;
  std::pair<double, double> eta_storage{0.195, 0.183};

  void validate() const;
};

std::vector<EfficiencyStage> qfc_stages(const LinkTables& t);
std::vector<EfficiencyStage> qm_stages(const LinkTables& t);
RateChain r369_chain(const LinkTables& t);
RateChain r580_chain(const LinkTables& t);
RateChain ti_qm_chain(const LinkTables& t);

struct RateSummary {
  double r369_hz;
  double eta_qfc;
  double r580_hz;
  double eta_qm;
  double r_ti_qm_hz;
  double eta_overall;
};

/// All headline rates for one polarization.
RateSummary rate_summary(const LinkTables& t, Polarization pol);

// ---------------------------------------------------------------------------
// Infidelity ledger

/// The published per-source infidelities (absolute fractions).
std::vector<ErrorSource> published_error_ledger();

struct ErrorModelInputs {
  ion::IonParams ion;
  photon::JitterParams jitter;
  double detection_delay_us = 2.66;
  double mw_propagation_us = 0.51;
  double spam = 0.007;
  double mw_rotation = 0.001;
  double qfc_process_fidelity = 0.969;
  double excitation = 0.033;
  double pi_collection = 0.005;
  double snr = 28.0;
  double pbs_extinction = 3500.0;
  std::array<double, 4> storage_probe_fidelities{0.9997, 0.9990, 0.9981, 0.9934};

  void validate() const;
};

/// Per-source infidelities recomputed from the channel models, in the same
/// row order as published_error_ledger().
std::vector<ErrorSource> model_error_ledger(const ErrorModelInputs& in);

/// Columns: source, published_infidelity, model_infidelity, model_ref.
void write_ledger_csv(const std::vector<ErrorSource>& published, const std::vector<ErrorSource>& model,
                      std::ostream& os);

}  // namespace hetlink::budget

#endif  // HETLINK_BUDGET_HPP
