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

#include "hetlink/photon_chain.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace hetlink::photon {

namespace {

const std::array<CMatrix, 4>& pauli_basis() {
  static const std::array<CMatrix, 4> basis{pauli_matrix('I'), pauli_matrix('X'),
                                            pauli_matrix('Y'), pauli_matrix('Z')};
  return basis;
}

}  // namespace

void JitterParams::validate() const {
  if (awg_rms_ns < 0.0 || transceiver_rms_ns < 0.0) {
    throw ParameterError("JitterParams: jitter components must be >= 0");
  }
  if (!(zeeman_omega > 0.0)) throw ParameterError("JitterParams: zeeman_omega must be > 0");
}

double jitter_total_rms(const JitterParams& p) {
  p.validate();
  return std::hypot(p.awg_rms_ns, p.transceiver_rms_ns);
}

double jitter_phase_rms(const JitterParams& p) { return jitter_total_rms(p) * 1e-9 * p.zeeman_omega; }

QuantumChannel jitter_dephasing_channel(const JitterParams& p) {
  const double dphi = jitter_phase_rms(p);
  return dephasing(std::exp(-0.5 * dphi * dphi)).on(Subsystem::Ion);
}

QuantumChannel pbs_bitflip_channel(double extinction) {
  if (!(extinction >= 1.0)) throw ParameterError("pbs_bitflip_channel: extinction must be >= 1");
  const double eps = std::isinf(extinction) ? 0.0 : 1.0 / extinction;
  return bit_flip(eps).on(Subsystem::Photon);
}

double noise_fraction(double snr) {
  if (snr < 0.0 || std::isnan(snr)) throw ParameterError("noise_fraction: snr must be >= 0");
  return std::isinf(snr) ? 0.0 : 1.0 / (snr + 1.0);
}

DensityMatrix dark_noise_admixture(const DensityMatrix& rho, double snr) {
  if (rho.dim() != 4 || rho.subnormalized()) {
    throw StateError("dark_noise_admixture: needs a normalized two-qubit state");
  }
  return mix(DensityMatrix::maximally_mixed(4), rho, noise_fraction(snr));
}

QuantumChannel photon_depolarizing_error(double infidelity) {
  if (infidelity < 0.0 || infidelity > 0.75) {
    throw ParameterError("photon_depolarizing_error: infidelity outside [0, 0.75]");
  }
  return depolarizing(2, 4.0 * infidelity / 3.0).on(Subsystem::Photon);
}

// ---------------------------------------------------------------------------

ProcessMatrix::ProcessMatrix(CMatrix chi) : chi_(std::move(chi)) {
  if (chi_.rows() != 4 || chi_.cols() != 4) throw StateError("ProcessMatrix: chi must be 4x4");
  if ((chi_ - chi_.adjoint()).cwiseAbs().maxCoeff() > 1e-9) {
    throw StateError("ProcessMatrix: chi is not Hermitian");
  }
  chi_ = 0.5 * (chi_ + chi_.adjoint()).eval();
  if (std::abs(chi_.trace().real() - 1.0) > 1e-9) throw StateError("ProcessMatrix: trace is not 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(chi_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9) throw StateError("ProcessMatrix: chi is not PSD");

  const auto& p = pauli_basis();
  CMatrix sum = CMatrix::Zero(2, 2);
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) sum += chi_(m, n) * p[n] * p[m];
  }
  if ((sum - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() > 1e-9) {
    throw StateError("ProcessMatrix: induced map is not trace preserving");
  }
}

ProcessMatrix ProcessMatrix::identity() {
  CMatrix chi = CMatrix::Zero(4, 4);
  chi(0, 0) = 1.0;
  return ProcessMatrix(chi);
}

ProcessMatrix ProcessMatrix::depolarizing(double process_fidelity) {
  if (process_fidelity < 0.0 || process_fidelity > 1.0) {
    throw ParameterError("ProcessMatrix::depolarizing: fidelity outside [0, 1]");
  }
  CMatrix chi = CMatrix::Zero(4, 4);
  chi(0, 0) = process_fidelity;
  for (int k = 1; k < 4; ++k) chi(k, k) = (1.0 - process_fidelity) / 3.0;
  return ProcessMatrix(chi);
}

ProcessMatrix ProcessMatrix::from_unitary(const CMatrix& u) {
  const auto& p = pauli_basis();
  CVector c(4);
  for (int j = 0; j < 4; ++j) c(j) = 0.5 * (p[j] * u).trace();  // P_j is Hermitian
  return ProcessMatrix(c * c.adjoint());
}

QuantumChannel process_matrix_channel(const ProcessMatrix& chi) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(chi.chi());
  const auto& p = pauli_basis();
  std::vector<CMatrix> kraus;
  for (int i = 3; i >= 0; --i) {
    const double lambda = es.eigenvalues()(i);
    if (lambda <= 1e-14) continue;
    CMatrix k = CMatrix::Zero(2, 2);
    for (int j = 0; j < 4; ++j) k += es.eigenvectors()(j, i) * p[j];
    kraus.push_back(std::sqrt(lambda) * k);
  }
  return QuantumChannel(std::move(kraus), true);
}

ProcessMatrix reconstruct_process_matrix(const QuantumChannel& ch) {
  if (ch.dim() != 2) throw StateError("reconstruct_process_matrix: single-qubit channel required");
  auto image = [&](const CVector& psi) {
    CMatrix out = CMatrix::Zero(2, 2);
    const CMatrix in = psi * psi.adjoint();
    for (const auto& k : ch.kraus()) out += k * in * k.adjoint();
    return out;
  };
  const double r = std::numbers::sqrt2 / 2.0;
  const Complex i(0.0, 1.0);
  CVector zero(2), one(2), plus(2), plus_i(2);
  zero << 1.0, 0.0;
  one << 0.0, 1.0;
  plus << r, r;
  plus_i << r, i * r;

  const CMatrix e00 = image(zero);
  const CMatrix e11 = image(one);
  const CMatrix e10 = image(plus) - i * image(plus_i) - 0.5 * (1.0 - i) * (e00 + e11);  // E(|1><0|)
  const CMatrix e01 = e10.adjoint();

  // Choi matrix J = sum_ab |a><b| (x) E(|a><b|).
  CMatrix choi = CMatrix::Zero(4, 4);
  choi.block(0, 0, 2, 2) = e00;
  choi.block(0, 2, 2, 2) = e01;
  choi.block(2, 0, 2, 2) = e10;
  choi.block(2, 2, 2, 2) = e11;

  // |P>> = sum_a |a> (x) P|a>;  chi_mn = <<P_m| J |P_n>> / 4.
  const auto& p = pauli_basis();
  std::array<CVector, 4> vec;
  for (int m = 0; m < 4; ++m) {
    vec[m] = CVector::Zero(4);
    for (int a = 0; a < 2; ++a) vec[m].segment(2 * a, 2) = p[m].col(a);
  }
  CMatrix chi(4, 4);
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) chi(m, n) = vec[m].dot(choi * vec[n]) / 4.0;
  }
  return ProcessMatrix(chi);
}

double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi_ideal) {
  return state_fidelity(chi.chi(), chi_ideal.chi());
}

nlohmann::json to_json(const ProcessMatrix& chi) {
  nlohmann::json j = matrix_to_json(chi.chi());
  j["basis"] = "pauli-IXYZ";
  return j;
}

ProcessMatrix process_matrix_from_json(const nlohmann::json& j) {
  if (j.value("basis", std::string()) != "pauli-IXYZ") {
    throw StateError("process_matrix_from_json: expected basis \"pauli-IXYZ\"");
  }
  return ProcessMatrix(matrix_from_json(j));
}

// ---------------------------------------------------------------------------

void NoiseParams::validate() const {
  if (!(snr > 0.0)) throw ParameterError("NoiseParams: snr must be > 0");
  if (!(pbs_extinction > 1.0)) throw ParameterError("NoiseParams: pbs_extinction must be > 1");
  if (!(window_ns >= 0.0)) throw ParameterError("NoiseParams: window_ns must be >= 0");
  if (!(lifetime_ns > 0.0)) throw ParameterError("NoiseParams: lifetime_ns must be > 0");
}

double window_efficiency(const NoiseParams& p) {
  if (!(p.lifetime_ns > 0.0)) throw ParameterError("window_efficiency: lifetime must be > 0");
  if (p.window_ns < 0.0) throw ParameterError("window_efficiency: negative window");
  return -std::expm1(-p.window_ns / p.lifetime_ns);
}

}  // namespace hetlink::photon
