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

// Flying-qubit path between emission and detection: frequency conversion,
// timing jitter, polarization analysis and detector noise.

#ifndef HETLINK_PHOTON_CHAIN_HPP
#define HETLINK_PHOTON_CHAIN_HPP

#include <numbers>

#include "hetlink/qstate.hpp"

namespace hetlink::photon {

struct JitterParams {
  double awg_rms_ns = 0.305;
  double transceiver_rms_ns = 0.056;
  double zeeman_omega = 2.0 * std::numbers::pi * 11.22e6;  // rad/s

  void validate() const;
};

/// Independent jitter contributions added in quadrature.
double jitter_total_rms(const JitterParams& p);

/// Delta Phi = t_rms * omega.
double jitter_phase_rms(const JitterParams& p);

/// Quasi-static Gaussian phase noise on the ion qubit: coherence factor
/// exp(-dPhi^2 / 2).
QuantumChannel jitter_dephasing_channel(const JitterParams& p);

/// (1 - eps) rho + eps (I x X) rho (I x X), eps = 1 / extinction.
QuantumChannel pbs_bitflip_channel(double extinction);

/// (1 - p) rho + p I/4 with p = 1/(snr + 1). snr may be +inf.
DensityMatrix dark_noise_admixture(const DensityMatrix& rho, double snr);
double noise_fraction(double snr);

/// Photon-side depolarizing channel lowering Bell fidelity by `infidelity`.
QuantumChannel photon_depolarizing_error(double infidelity);

// ---------------------------------------------------------------------------
// Single-qubit process matrices

/// chi over the Pauli basis {I, X, Y, Z}: E(rho) = sum_mn chi_mn P_m rho P_n.
class ProcessMatrix {
 public:
  /// Validates Hermiticity, PSD, unit trace and trace preservation (1e-9).
  explicit ProcessMatrix(CMatrix chi);

  static ProcessMatrix identity();
  /// Depolarizing map whose process fidelity against the identity is `f`.
  static ProcessMatrix depolarizing(double process_fidelity);
  /// Process matrix of a unitary U = sum_j c_j P_j.
  static ProcessMatrix from_unitary(const CMatrix& u);

  const CMatrix& chi() const { return chi_; }

 private:
  CMatrix chi_;
};

/// Kraus form K_i = sqrt(lambda_i) sum_j v_ij P_j from the eigendecomposition.
QuantumChannel process_matrix_channel(const ProcessMatrix& chi);

/// Linear-inversion process tomography from the images of |0>, |1>, |+>, |+i>.
ProcessMatrix reconstruct_process_matrix(const QuantumChannel& single_qubit);

/// Fidelity between chi matrices treated as states.
double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi_ideal);

nlohmann::json to_json(const ProcessMatrix& chi);
ProcessMatrix process_matrix_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------

struct NoiseParams {
  double snr = 28.0;
  double pbs_extinction = 3500.0;
  double window_ns = 30.0;
  double lifetime_ns = 8.05;

  void validate() const;
};

/// Fraction of an exponential decay captured by the detection window.
double window_efficiency(const NoiseParams& p);

}  // namespace hetlink::photon

#endif  // HETLINK_PHOTON_CHAIN_HPP
