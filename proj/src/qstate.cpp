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

#include "hetlink/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <string>

namespace hetlink {

namespace {

bool valid_dim(Eigen::Index d) { return d == 2 || d == 4; }

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "; ";
    out += parts[i];
  }
  return out;
}

void require_same_dim(int a, int b, const char* op) {
  if (a != b) {
    throw StateError(std::string(op) + ": dimension mismatch (" + std::to_string(a) +
                     " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration: " + join(problems)),
      problems_(std::move(problems)) {}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (!valid_dim(amplitudes_.size())) {
    throw StateError("PureState: dimension must be 2 or 4");
  }
  if (std::abs(amplitudes_.norm() - 1.0) > 1e-12) {
    throw StateError("PureState: amplitudes are not normalized");
  }
}

PureState PureState::basis(int dim, int index) {
  CVector v = CVector::Zero(dim);
  if (index < 0 || index >= dim) throw StateError("PureState::basis: index out of range");
  v(index) = 1.0;
  return PureState(std::move(v));
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(const CMatrix& m, Norm norm) : m_(m), norm_(norm) {
  if (m_.rows() != m_.cols() || !valid_dim(m_.rows())) {
    throw StateError("DensityMatrix: must be square with dimension 2 or 4");
  }
  if (max_abs(m_ - m_.adjoint()) > kHermitianTol) {
    throw StateError("DensityMatrix: not Hermitian");
  }
  // Symmetrize away rounding below the tolerance.
  m_ = 0.5 * (m_ + m_.adjoint()).eval();

  const double tr = m_.trace().real();
  if (norm_ == Norm::Unit && std::abs(tr - 1.0) > kTraceTol) {
    throw StateError("DensityMatrix: trace " + std::to_string(tr) + " is not 1");
  }
  if (norm_ == Norm::Sub && (tr < -kTraceTol || tr > 1.0 + kTraceTol)) {
    throw StateError("DensityMatrix: subnormalized trace outside [0, 1]");
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_);
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev.minCoeff() < kEigenFloor) {
    throw StateError("DensityMatrix: negative eigenvalue " + std::to_string(ev.minCoeff()));
  }
  if (ev.minCoeff() < 0.0) {
    Eigen::VectorXd clipped = ev.cwiseMax(0.0);
    CMatrix rebuilt = es.eigenvectors() * clipped.cast<Complex>().asDiagonal() *
                      es.eigenvectors().adjoint();
    const double new_tr = rebuilt.trace().real();
    if (new_tr > 0.0) rebuilt *= tr / new_tr;
    m_ = 0.5 * (rebuilt + rebuilt.adjoint());
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  const CVector& a = psi.amplitudes();
  return DensityMatrix(a * a.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (!valid_dim(dim)) throw StateError("maximally_mixed: dimension must be 2 or 4");
  return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::normalized() const {
  const double tr = trace();
  if (tr <= 0.0) throw StateError("DensityMatrix::normalized: zero herald probability");
  return DensityMatrix(m_ / tr, Norm::Unit);
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// ---------------------------------------------------------------------------
// Observable

Observable::Observable(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || !valid_dim(m_.rows())) {
    throw StateError("Observable: must be square with dimension 2 or 4");
  }
  if (max_abs(m_ - m_.adjoint()) > kHermitianTol) {
    throw StateError("Observable: not Hermitian");
  }
}

Observable Observable::pauli(char name) { return Observable(pauli_matrix(name)); }

Observable Observable::xz_plane(double theta) {
  return Observable(std::cos(theta) * pauli_matrix('Z') + std::sin(theta) * pauli_matrix('X'));
}

// ---------------------------------------------------------------------------
// QuantumChannel

QuantumChannel::QuantumChannel(std::vector<CMatrix> kraus, bool trace_preserving)
    : kraus_(std::move(kraus)), trace_preserving_(trace_preserving) {
  if (kraus_.empty()) throw StateError("QuantumChannel: no Kraus operators");
  const auto d = kraus_.front().rows();
  if (!valid_dim(d)) throw StateError("QuantumChannel: dimension must be 2 or 4");
  CMatrix sum = CMatrix::Zero(d, d);
  for (const auto& k : kraus_) {
    if (k.rows() != d || k.cols() != d) {
      throw StateError("QuantumChannel: Kraus operators differ in shape");
    }
    sum += k.adjoint() * k;
  }
  const CMatrix id = CMatrix::Identity(d, d);
  if (trace_preserving_) {
    if (max_abs(sum - id) > kKrausTol) {
      throw StateError("QuantumChannel: sum K^dag K deviates from identity");
    }
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (sum + sum.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() > 1.0 + kKrausTol) {
      throw StateError("QuantumChannel: sum K^dag K exceeds identity");
    }
  }
}

QuantumChannel QuantumChannel::identity(int dim) {
  return QuantumChannel({CMatrix::Identity(dim, dim)}, true);
}

QuantumChannel QuantumChannel::unitary(const CMatrix& u) { return QuantumChannel({u}, true); }

QuantumChannel QuantumChannel::on(Subsystem target) const {
  if (dim() != 2) throw StateError("QuantumChannel::on: channel must act on one qubit");
  const CMatrix id = CMatrix::Identity(2, 2);
  std::vector<CMatrix> lifted;
  lifted.reserve(kraus_.size());
  for (const auto& k : kraus_) {
    lifted.push_back(target == Subsystem::Ion ? kron(k, id) : kron(id, k));
  }
  return QuantumChannel(std::move(lifted), trace_preserving_);
}

QuantumChannel QuantumChannel::then(const QuantumChannel& next) const {
  require_same_dim(dim(), next.dim(), "QuantumChannel::then");
  std::vector<CMatrix> composed;
  composed.reserve(kraus_.size() * next.kraus_.size());
  for (const auto& b : next.kraus_) {
    for (const auto& a : kraus_) composed.push_back(b * a);
  }
  return QuantumChannel(std::move(composed), trace_preserving_ && next.trace_preserving_);
}

// ---------------------------------------------------------------------------
// Free functions

CMatrix pauli_matrix(char name) {
  CMatrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (name) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw StateError(std::string("pauli_matrix: unknown Pauli '") + name + "'");
  }
  return m;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

PureState tensor_product(const PureState& a, const PureState& b) {
  if (a.dim() * b.dim() > kMaxDim) throw StateError("tensor_product: exceeds two qubits");
  CVector v(a.dim() * b.dim());
  for (int i = 0; i < a.dim(); ++i) {
    for (int j = 0; j < b.dim(); ++j) v(i * b.dim() + j) = a[i] * b[j];
  }
  v.normalize();
  return PureState(std::move(v));
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() * b.dim() > kMaxDim) throw StateError("tensor_product: exceeds two qubits");
  const auto norm = a.subnormalized() || b.subnormalized() ? DensityMatrix::Norm::Sub
                                                           : DensityMatrix::Norm::Unit;
  return DensityMatrix(kron(a.matrix(), b.matrix()), norm);
}

Observable tensor_product(const Observable& a, const Observable& b) {
  if (a.dim() * b.dim() > kMaxDim) throw StateError("tensor_product: exceeds two qubits");
  return Observable(kron(a.matrix(), b.matrix()));
}

double fidelity(const DensityMatrix& rho, const PureState& target) {
  require_same_dim(rho.dim(), target.dim(), "fidelity");
  const CVector& t = target.amplitudes();
  const Complex f = t.dot(rho.matrix() * t);  // dot() conjugates the left operand
  return std::clamp(f.real(), 0.0, 1.0);
}

double state_fidelity(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) throw StateError("state_fidelity: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<CMatrix> ea(0.5 * (a + a.adjoint()));
  Eigen::VectorXd sa = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  CMatrix sqrt_a = ea.eigenvectors() * sa.cast<Complex>().asDiagonal() * ea.eigenvectors().adjoint();
  CMatrix inner = sqrt_a * b * sqrt_a;
  Eigen::SelfAdjointEigenSolver<CMatrix> ei(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  // Rounding-level eigenvalues would otherwise add ~1e-8 through the square root.
  const Eigen::VectorXd ev = ei.eigenvalues();
  const double floor = 1e-13 * std::max(ev.maxCoeff(), 0.0);
  double root = 0.0;
  for (double x : ev) {
    if (x > floor) root += std::sqrt(x);
  }
  return std::clamp(root * root, 0.0, 1.0);
}

DensityMatrix apply_channel(const DensityMatrix& rho, const QuantumChannel& ch) {
  require_same_dim(rho.dim(), ch.dim(), "apply_channel");
  CMatrix out = CMatrix::Zero(rho.dim(), rho.dim());
  for (const auto& k : ch.kraus()) out += k * rho.matrix() * k.adjoint();
  const auto norm = rho.subnormalized() || !ch.trace_preserving() ? DensityMatrix::Norm::Sub
                                                                  : DensityMatrix::Norm::Unit;
  if (norm == DensityMatrix::Norm::Unit) {
    // Remove accumulated rounding so chained channels keep exact unit trace.
    out /= out.trace().real();
  }
  return DensityMatrix(out, norm);
}

double expectation(const DensityMatrix& rho, const Observable& obs) {
  require_same_dim(rho.dim(), obs.dim(), "expectation");
  return (rho.matrix() * obs.matrix()).trace().real();
}

DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep) {
  if (rho.dim() != 4) throw StateError("partial_trace: state must be two-qubit");
  const int k = static_cast<int>(keep);
  if (k != 0 && k != 1) throw StateError("partial_trace: invalid subsystem index");
  CMatrix red = CMatrix::Zero(2, 2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int s = 0; s < 2; ++s) {
        // index = 2 * ion + photon
        const int r = keep == Subsystem::Ion ? 2 * a + s : 2 * s + a;
        const int c = keep == Subsystem::Ion ? 2 * b + s : 2 * s + b;
        red(a, b) += rho(r, c);
      }
    }
  }
  return DensityMatrix(red, rho.subnormalized() ? DensityMatrix::Norm::Sub : DensityMatrix::Norm::Unit);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "trace_distance");
  CMatrix diff = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

DensityMatrix mix(const DensityMatrix& a, const DensityMatrix& b, double w) {
  require_same_dim(a.dim(), b.dim(), "mix");
  if (w < 0.0 || w > 1.0) throw StateError("mix: weight outside [0, 1]");
  const auto norm = a.subnormalized() || b.subnormalized() ? DensityMatrix::Norm::Sub
                                                           : DensityMatrix::Norm::Unit;
  return DensityMatrix(w * a.matrix() + (1.0 - w) * b.matrix(), norm);
}

QuantumChannel depolarizing(int dim, double p) {
  if (p < 0.0 || p > 1.0) throw ParameterError("depolarizing: p outside [0, 1]");
  if (!valid_dim(dim)) throw StateError("depolarizing: dimension must be 2 or 4");
  // Uniform mixture over the d^2 Pauli (or Pauli-product) unitaries.
  std::vector<CMatrix> paulis;
  const char names[] = {'I', 'X', 'Y', 'Z'};
  if (dim == 2) {
    for (char n : names) paulis.push_back(pauli_matrix(n));
  } else {
    for (char a : names) {
      for (char b : names) paulis.push_back(kron(pauli_matrix(a), pauli_matrix(b)));
    }
  }
  const double d2 = static_cast<double>(dim * dim);
  std::vector<CMatrix> kraus;
  kraus.push_back(std::sqrt(1.0 - p + p / d2) * paulis.front());
  for (size_t i = 1; i < paulis.size(); ++i) {
    if (p > 0.0) kraus.push_back(std::sqrt(p / d2) * paulis[i]);
  }
  return QuantumChannel(std::move(kraus), true);
}

QuantumChannel dephasing(double coherence_factor) {
  if (coherence_factor < 0.0 || coherence_factor > 1.0) {
    throw ParameterError("dephasing: coherence factor outside [0, 1]");
  }
  const double flip = 0.5 * (1.0 - coherence_factor);
  std::vector<CMatrix> kraus{std::sqrt(1.0 - flip) * pauli_matrix('I')};
  if (flip > 0.0) kraus.push_back(std::sqrt(flip) * pauli_matrix('Z'));
  return QuantumChannel(std::move(kraus), true);
}

QuantumChannel bit_flip(double eps) {
  if (eps < 0.0 || eps > 1.0) throw ParameterError("bit_flip: eps outside [0, 1]");
  std::vector<CMatrix> kraus;
  if (eps < 1.0) kraus.push_back(std::sqrt(1.0 - eps) * pauli_matrix('I'));
  if (eps > 0.0) kraus.push_back(std::sqrt(eps) * pauli_matrix('X'));
  return QuantumChannel(std::move(kraus), true);
}

PureState bell_state(double phi) {
  CVector v = CVector::Zero(4);
  v(0) = std::numbers::sqrt2 / 2.0;                                      // |1'>|s+>
  v(3) = std::polar(1.0, phi) * (std::numbers::sqrt2 / 2.0);             // |1>|s->
  v.normalize();
  return PureState(std::move(v));
}

DensityMatrix werner_state(const PureState& psi, double p) {
  return mix(DensityMatrix::from_pure(psi), DensityMatrix::maximally_mixed(psi.dim()), p);
}

double round_sig15(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return std::strtod(buf, nullptr);
}

nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(round_sig15(m(r, c).real()));
      im.push_back(round_sig15(m(r, c).imag()));
    }
  }
  return {{"dim", m.rows()}, {"re", re}, {"im", im}};
}

CMatrix matrix_from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (dim <= 0 || re.size() != static_cast<size_t>(dim * dim) || im.size() != re.size()) {
    throw StateError("matrix_from_json: element count does not match dim");
  }
  CMatrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      m(r, c) = Complex(re[r * dim + c].get<double>(), im[r * dim + c].get<double>());
    }
  }
  return m;
}

nlohmann::json to_json(const DensityMatrix& rho) { return matrix_to_json(rho.matrix()); }

DensityMatrix density_matrix_from_json(const nlohmann::json& j) {
  CMatrix m = matrix_from_json(j);
  // 15-digit serialization loses up to ~1e-15 per element.
  const double tr = m.trace().real();
  if (std::abs(tr - 1.0) < 1e-12) m /= tr;
  return DensityMatrix(m);
}

}  // namespace hetlink
