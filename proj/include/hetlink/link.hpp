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

// Channel pipeline from ion-photon emission to the measured two-qubit state.

#ifndef HETLINK_LINK_HPP
#define HETLINK_LINK_HPP

#include <optional>
#include <string>
#include <vector>

#include "hetlink/ion_node.hpp"
#include "hetlink/photon_chain.hpp"

namespace hetlink::link {

struct StorageStage {
  double eta_h = 0.195;
  double eta_v = 0.183;
  double residual_infidelity = 0.0024;
};

struct PipelineParams {
  ion::IonParams ion;
  photon::JitterParams jitter;
  double delay_us = 2.66;
  double mw_propagation_us = 0.51;
  double excitation_error = 0.033;
  double pi_collection_error = 0.005;
  std::optional<photon::ProcessMatrix> qfc;
  std::optional<StorageStage> storage;
  std::optional<double> pbs_extinction = 3500.0;
  double spam_error = 0.007;
  double mw_rotation_error = 0.001;
  double snr = 28.0;

  void validate() const;
};

struct StageRecord {
  std::string name;
  double fidelity;  // Bell fidelity after this stage
};

struct PipelineResult {
  DensityMatrix state;     // normalized, before detector noise
  DensityMatrix measured;  // with the dark-noise admixture
  double herald_probability;
  double fidelity;  // of `measured` against the phi = 0 Bell state
  std::vector<StageRecord> stages;
};

/// emit -> excitation / pi-collection -> decoherence -> jitter -> QFC ->
/// storage (heralded, renormalized) -> storage residual -> PBS ->
/// SPAM / MW -> dark noise.
PipelineResult run_pipeline(const PipelineParams& p);

}  // namespace hetlink::link

#endif  // HETLINK_LINK_HPP
