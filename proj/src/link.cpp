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

#include "hetlink/link.hpp"

#include "hetlink/memory.hpp"

namespace hetlink::link {

void PipelineParams::validate() const {
  ion.validate();
  jitter.validate();
  if (delay_us < 0.0 || mw_propagation_us < 0.0) throw ParameterError("PipelineParams: negative delay");
  for (double e : {excitation_error, pi_collection_error, spam_error, mw_rotation_error}) {
    if (!(e >= 0.0 && e <= 0.75)) throw ParameterError("PipelineParams: error rate outside [0, 0.75]");
  }
  if (storage) {
    if (storage->eta_h < 0.0 || storage->eta_h > 1.0 || storage->eta_v < 0.0 || storage->eta_v > 1.0) {
      throw ParameterError("PipelineParams: storage efficiencies outside [0, 1]");
    }
    if (storage->eta_h + storage->eta_v <= 0.0) throw ParameterError("PipelineParams: storage never heralds");
  }
  if (!(snr >= 0.0)) throw ParameterError("PipelineParams: snr must be >= 0");
}

PipelineResult run_pipeline(const PipelineParams& p) {
  p.validate();
  const PureState target = bell_state(0.0);
  const double t_ns = (p.delay_us + p.mw_propagation_us) * 1e3;
  const PureState emitted = ion::emit_entangled_state(p.ion, t_ns, ion::compensation_phase(p.ion, t_ns));

  DensityMatrix rho = DensityMatrix::from_pure(emitted);
  std::vector<StageRecord> stages{{"emit", fidelity(rho, target)}};
  auto apply = [&](const std::string& name, const QuantumChannel& ch) {
    rho = apply_channel(rho, ch);
    stages.push_back({name, fidelity(rho, target)});
  };

  apply("pulse_excitation", photon::photon_depolarizing_error(p.excitation_error));
  apply("pi_collection", photon::photon_depolarizing_error(p.pi_collection_error));
  apply("ion_decoherence", ion::decoherence_channel(p.ion, p.delay_us + p.mw_propagation_us));
  apply("arrival_jitter", photon::jitter_dephasing_channel(p.jitter));
  if (p.qfc) apply("qfc", photon::process_matrix_channel(*p.qfc).on(Subsystem::Photon));

  double herald = 1.0;
  if (p.storage) {
    herald = memory::storage_herald_probability(rho, p.storage->eta_h, p.storage->eta_v);
    const DensityMatrix stored = apply_channel(rho, memory::storage_channel(p.storage->eta_h, p.storage->eta_v));
    rho = stored.normalized();
    stages.push_back({"qm_storage_heralded", fidelity(rho, target)});
    apply("qm_storage_residual", memory::storage_residual_channel(p.storage->residual_infidelity));
  }
  if (p.pbs_extinction) apply("pbs_detection", photon::pbs_bitflip_channel(*p.pbs_extinction));
  apply("spam", ion::ion_depolarizing_error(p.spam_error));
  apply("mw_rotation", ion::ion_depolarizing_error(p.mw_rotation_error));

  const DensityMatrix measured = photon::dark_noise_admixture(rho, p.snr);
  const double f = fidelity(measured, target);
  stages.push_back({"dark_noise", f});
  return {rho, measured, herald, f, std::move(stages)};
}

}  // namespace hetlink::link
