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

#ifndef HETLINK_QSTATE_HPP
#define HETLINK_QSTATE_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hetlink/error.hpp"

namespace hetlink {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Basis ordering shared by every module:
//   ion    (|1'>, |1>), after microwave mapping (|0>, |1>)
//   photon (|sigma+> == |H>, |sigma-> == |V>)
// The first basis vector of each qubit is the +1 eigenvector of Z.
// Two-qubit index = 2 * ion + photon.
enum class Subsystem { Ion = 0, Photon = 1 };

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenFloor = -1e-9;
inline constexpr double kKrausTol = 1e-9;
inline constexpr int kMaxDim = 4;

/// A normalized state vector of one or two qubits.
class PureState {
 public:
  /// Throws StateError unless |amplitudes| is within 1e-12 of 1 and dim is 2 or 4.
  explicit PureState(CVector amplitudes);

  /// Computational basis vector |index>.
  static PureState basis(int dim, int index);

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const CVector& amplitudes() const { return amplitudes_; }
  Complex operator[](int i) const { return amplitudes_(i); }

 private:
  CVector amplitudes_;
};

/// Positive semidefinite Hermitian matrix of dimension 2 or 4.
///
/// A normalized state has unit trace. A subnormalized state (the output of a
/// trace-decreasing heralded channel) has trace in [0, 1]; its trace is the
/// herald probability and normalized() post-selects on the herald.
class DensityMatrix {
 public:
  enum class Norm { Unit, Sub };

  /// Validates Hermiticity, trace and the eigenvalue floor. Eigenvalues in
  /// (-1e-9, 0) are clipped to zero and the matrix is rescaled to its
  /// original trace.
  explicit DensityMatrix(const CMatrix& m, Norm norm = Norm::Unit);

  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }
  double trace() const { return m_.trace().real(); }
  bool subnormalized() const { return norm_ == Norm::Sub; }

  /// Renormalizes to unit trace. Throws StateError on a zero-trace state.
  DensityMatrix normalized() const;

  /// Ascending eigenvalues.
  Eigen::VectorXd eigenvalues() const;

 private:
  CMatrix m_;
  Norm norm_;
};

/// Hermitian matrix used as a measurement observable.
class Observable {
 public:
  explicit Observable(CMatrix m);

  /// Single-qubit Pauli by name: 'I', 'X', 'Y' or 'Z'.
  static Observable pauli(char name);
  /// cos(theta) Z + sin(theta) X.
  static Observable xz_plane(double theta);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

/// Completely positive map in Kraus form.
///
/// Invariant (checked at construction): sum_i K_i^dag K_i equals the identity
/// within 1e-9 for trace-preserving channels, and is bounded by the identity
/// otherwise.
class QuantumChannel {
 public:
  QuantumChannel(std::vector<CMatrix> kraus, bool trace_preserving);

  static QuantumChannel identity(int dim);
  /// Single Kraus operator; must be unitary.
  static QuantumChannel unitary(const CMatrix& u);

  int dim() const { return static_cast<int>(kraus_.front().rows()); }
  const std::vector<CMatrix>& kraus() const { return kraus_; }
  bool trace_preserving() const { return trace_preserving_; }

  /// Embeds a single-qubit channel into the two-qubit space, acting on `target`.
  QuantumChannel on(Subsystem target) const;

  /// Channel that applies `this` first and then `next`.
  QuantumChannel then(const QuantumChannel& next) const;

 private:
  std::vector<CMatrix> kraus_;
  bool trace_preserving_;
};

// Pauli matrices.
CMatrix pauli_matrix(char name);
CMatrix kron(const CMatrix& a, const CMatrix& b);

PureState tensor_product(const PureState& a, const PureState& b);
DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);
Observable tensor_product(const Observable& a, const Observable& b);

/// <target| rho |target>.
double fidelity(const DensityMatrix& rho, const PureState& target);

/// Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2 between two normalized states.
double state_fidelity(const CMatrix& a, const CMatrix& b);

/// sum_i K_i rho K_i^dag. The output is subnormalized when the channel or the
/// input is.
DensityMatrix apply_channel(const DensityMatrix& rho, const QuantumChannel& ch);

/// tr(rho O).
double expectation(const DensityMatrix& rho, const Observable& obs);

/// Reduced state of the subsystem `keep` of a two-qubit state.
DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep);

/// Half the trace norm of a - b.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// w * a + (1 - w) * b.
DensityMatrix mix(const DensityMatrix& a, const DensityMatrix& b, double w);

// Standard single-qubit channels.
QuantumChannel depolarizing(int dim, double p);  // (1-p) rho + p tr(rho) I/dim
QuantumChannel dephasing(double coherence_factor);  // off-diagonals scaled
QuantumChannel bit_flip(double eps);

/// Bell state (|1'>|s+> + e^{i phi} |1>|s->)/sqrt(2) in the shared ordering.
PureState bell_state(double phi = 0.0);

/// Werner state p |Psi><Psi| + (1-p) I/4.
DensityMatrix werner_state(const PureState& psi, double p);

// JSON matrix format: {"dim": n, "re": [...], "im": [...]} row-major.
nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(const nlohmann::json& j);

/// Rounds to 15 significant digits so serialized reports are stable.
double round_sig15(double x);

}  // namespace hetlink

#endif  // HETLINK_QSTATE_HPP
