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

#include "hetlink/tomography.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "hetlink/photon_chain.hpp"

namespace hetlink::tomo {

namespace {

using M4 = Eigen::Matrix4cd;

// Eigenvector of `a` for eigenvalue +1 (sign = 0) or -1 (sign = 1).
Eigen::Vector2cd axis_eigvec(Axis a, int sign) {
  const double r = std::numbers::sqrt2 / 2.0;
  const Complex i(0.0, 1.0);
  Eigen::Vector2cd v;
  switch (a) {
    case Axis::Z: v = sign == 0 ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0); break;
    case Axis::X: v = sign == 0 ? Eigen::Vector2cd(r, r) : Eigen::Vector2cd(r, -r); break;
    case Axis::Y: v = sign == 0 ? Eigen::Vector2cd(r, i * r) : Eigen::Vector2cd(r, -i * r); break;
  }
  return v;
}

struct Term {
  M4 proj;
  double weight;  // n_k / N
};

std::vector<Term> build_terms(const std::vector<CountRecord>& records, double& total) {
  if (records.size() != 9) {
    throw StateError("mle_reconstruct: expected 9 settings, got " + std::to_string(records.size()));
  }
  for (const auto& s : all_settings()) {
    const auto n = std::count_if(records.begin(), records.end(),
                                 [&](const CountRecord& r) { return r.setting == s; });
    if (n != 1) {
      throw StateError(std::string("mle_reconstruct: setting ") + axis_name(s.ion) + axis_name(s.photon) +
                       (n == 0 ? " missing" : " repeated"));
    }
  }
  total = 0.0;
  for (const auto& r : records) {
    r.validate();
    if (!(r.shots > 0.0)) throw StateError("mle_reconstruct: setting with zero shots");
    total += r.shots;
  }
  std::vector<Term> terms;
  for (const auto& r : records) {
    for (int k = 0; k < 4; ++k) {
      if (r.counts[k] > 0.0) terms.push_back({M4(outcome_projector(r.setting, k)), r.counts[k] / total});
    }
  }
  return terms;
}

M4 hermitize(const M4& m) { return 0.5 * (m + m.adjoint()); }

std::string fmt_sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace

char axis_name(Axis a) {
  switch (a) {
    case Axis::Z: return 'Z';
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
  }
  return '?';
}

Axis axis_from_name(char c) {
  switch (c) {
    case 'Z': case 'z': return Axis::Z;
    case 'X': case 'x': return Axis::X;
    case 'Y': case 'y': return Axis::Y;
    default: throw StateError(std::string("axis_from_name: unknown axis '") + c + "'");
  }
}

std::array<MeasurementSetting, 9> all_settings() {
  std::array<MeasurementSetting, 9> out;
  const Axis order[3] = {Axis::Z, Axis::X, Axis::Y};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[3 * i + j] = {order[i], order[j]};
  }
  return out;
}

void CountRecord::validate() const {
  double sum = 0.0;
  for (double c : counts) {
    if (!(c >= 0.0)) throw StateError("CountRecord: negative count");
    sum += c;
  }
  if (std::abs(sum - shots) > 1e-9 * std::max(1.0, shots)) {
    throw StateError("CountRecord: counts do not sum to shots");
  }
}

CMatrix outcome_projector(const MeasurementSetting& s, int k) {
  if (k < 0 || k > 3) throw StateError("outcome_projector: outcome index outside [0, 3]");
  const Eigen::Vector2cd a = axis_eigvec(s.ion, k / 2);
  const Eigen::Vector2cd b = axis_eigvec(s.photon, k % 2);
  const CVector v = kron(a, b);
  return v * v.adjoint();
}

std::array<double, 4> outcome_probabilities(const DensityMatrix& rho, const MeasurementSetting& s,
                                            double snr) {
  if (rho.dim() != 4) throw StateError("outcome_probabilities: two-qubit state required");
  const DensityMatrix noisy = photon::dark_noise_admixture(rho.subnormalized() ? rho.normalized() : rho, snr);
  std::array<double, 4> p{};
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    p[k] = std::max(0.0, (outcome_projector(s, k) * noisy.matrix()).trace().real());
    sum += p[k];
  }
  for (double& x : p) x /= sum;
  return p;
}

CountRecord simulate_counts(const DensityMatrix& rho, const MeasurementSetting& s, long long shots,
                            double snr, CounterRng& rng) {
  if (shots <= 0) throw ParameterError("simulate_counts: shots must be > 0");
  const auto p = outcome_probabilities(rho, s, snr);
  const auto n = sample_multinomial(shots, p, rng);
  CountRecord r{s, {}, static_cast<double>(shots)};
  for (int k = 0; k < 4; ++k) r.counts[k] = static_cast<double>(n[k]);
  return r;
}

std::vector<CountRecord> simulate_tomography(const DensityMatrix& rho, long long total_shots, double snr,
                                             const CounterRng& rng) {
  if (total_shots < 9) throw ParameterError("simulate_tomography: need at least one shot per setting");
  const auto settings = all_settings();
  std::vector<CountRecord> out;
  for (int i = 0; i < 9; ++i) {
    const long long n = total_shots / 9 + (i < total_shots % 9 ? 1 : 0);
    CounterRng child = rng.child(static_cast<std::uint64_t>(i));
    out.push_back(simulate_counts(rho, settings[i], n, snr, child));
  }
  return out;
}

std::vector<CountRecord> exact_tomography(const DensityMatrix& rho, double shots_per_setting, double snr) {
  if (!(shots_per_setting > 0.0)) throw ParameterError("exact_tomography: shots must be > 0");
  std::vector<CountRecord> out;
  for (const auto& s : all_settings()) {
    const auto p = outcome_probabilities(rho, s, snr);
    CountRecord r{s, {}, shots_per_setting};
    for (int k = 0; k < 4; ++k) r.counts[k] = shots_per_setting * p[k];
    out.push_back(r);
  }
  return out;
}

MleResult mle_reconstruct(const std::vector<CountRecord>& records, const MleOptions& opt) {
  using V16 = Eigen::Matrix<double, 16, 1>;
  using M16 = Eigen::Matrix<double, 16, 16>;
  double total = 0.0;
  const std::vector<Term> terms = build_terms(records, total);
  const size_t n = terms.size();

  // T = sum_a theta_a E_a, lower triangular; rho = T^dag T for |theta| = 1.
  std::array<M4, 16> basis;
  {
    int a = 0;
    for (int k = 0; k < 4; ++k) {
      basis[a] = M4::Zero();
      basis[a++](k, k) = 1.0;
    }
    for (int j = 1; j < 4; ++j) {
      for (int k = 0; k < j; ++k) {
        basis[a] = M4::Zero();
        basis[a++](j, k) = 1.0;
        basis[a] = M4::Zero();
        basis[a++](j, k) = std::complex<double>(0.0, 1.0);
      }
    }
  }
  // p_i = theta^T A_i theta
  std::vector<M16> quad(n);
  for (size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 16; ++a) {
      const M4 pe = terms[i].proj * basis[a].adjoint();
      for (int b = a; b < 16; ++b) {
        quad[i](a, b) = quad[i](b, a) = (pe * basis[b]).trace().real();
      }
    }
  }
  auto to_rho = [&](const V16& th) {
    M4 t = M4::Zero();
    for (int a = 0; a < 16; ++a) t += th(a) * basis[a];
    return hermitize(t.adjoint() * t);
  };
  auto probabilities = [&](const V16& th, std::vector<double>& p) {
    for (size_t i = 0; i < n; ++i) {
      p[i] = th.dot(quad[i] * th);
      if (!(p[i] > 0.0)) return false;
    }
    return true;
  };
  // LL(b) - LL(a) without cancellation.
  auto gain = [&](const std::vector<double>& pa, const std::vector<double>& pb) {
    double d = 0.0;
    for (size_t i = 0; i < n; ++i) d += terms[i].weight * std::log1p((pb[i] - pa[i]) / pa[i]);
    return d;
  };

  V16 theta = V16::Zero();
  theta.head<4>().setConstant(0.5);
  std::vector<double> p(n), pc(n);
  probabilities(theta, p);
  double ll = 0.0;
  for (size_t i = 0; i < n; ++i) ll += terms[i].weight * std::log(p[i]);
  double mu = -1.0;
  double gap = std::numeric_limits<double>::infinity();
  double improvement = std::numeric_limits<double>::infinity();

  for (int it = 0; it <= opt.max_iterations; ++it) {
    const M4 rho = to_rho(theta);
    M4 r = M4::Zero();
    for (size_t i = 0; i < n; ++i) r += (terms[i].weight / p[i]) * terms[i].proj;
    // lambda_max(R) - 1 >= LL* - LL.
    gap = Eigen::SelfAdjointEigenSolver<M4>(hermitize(r), Eigen::EigenvaluesOnly).eigenvalues()(3) - 1.0;
    if (gap < opt.stationarity_tol && improvement < opt.rel_loglik_tol) {
      return {DensityMatrix(CMatrix(rho)), ll * total, it, gap};
    }
    if (it == opt.max_iterations) break;

    V16 g = -2.0 * theta;
    M16 h = 2.0 * M16::Identity() - 4.0 * theta * theta.transpose();  // minus the Hessian
    for (size_t i = 0; i < n; ++i) {
      const V16 at = quad[i] * theta;
      const double w = terms[i].weight;
      g += (2.0 * w / p[i]) * at;
      h += (4.0 * w / (p[i] * p[i])) * at * at.transpose() - (2.0 * w / p[i]) * quad[i];
    }
    if (mu < 0.0) mu = 1e-3 * h.diagonal().cwiseAbs().maxCoeff();

    bool accepted = false;
    while (mu < 1e30) {
      Eigen::LLT<M16> llt(h + mu * M16::Identity());
      if (llt.info() == Eigen::Success) {
        V16 cand = theta + llt.solve(g);
        cand /= cand.norm();
        if (probabilities(cand, pc)) {
          const double d = gain(p, pc);
          if (d >= -1e-15 * std::max(1.0, std::abs(ll))) {
            improvement = std::max(d, 0.0) / std::max(std::abs(ll), 1e-300);
            theta = cand;
            p.swap(pc);
            ll += d;
            mu = std::max(mu * 0.3, 1e-15);
            accepted = true;
            break;
          }
        }
      }
      mu = std::max(mu * 4.0, 1e-12);
    }
    if (!accepted) break;
  }
  throw ConvergenceError("mle_reconstruct: no convergence after " + std::to_string(opt.max_iterations) +
                             " iterations (gap " + fmt_sci(gap) + ")",
                         gap);
}

// ---------------------------------------------------------------------------

void ChshSettings::validate() const {
  for (const Observable* o : {&a0, &a1, &b0, &b1}) {
    if (o->dim() != 2) throw StateError("ChshSettings: observables must be single-qubit");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(o->matrix(), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (std::abs(ev(0) + 1.0) > 1e-9 || std::abs(ev(1) - 1.0) > 1e-9) {
      throw StateError("ChshSettings: observable eigenvalues must be +-1");
    }
  }
}

ChshSettings ChshSettings::xz(double theta_b0, double theta_b1) {
  return {Observable::pauli('X'), Observable::pauli('Z'), Observable::xz_plane(theta_b0),
          Observable::xz_plane(theta_b1)};
}

double chsh(const DensityMatrix& rho, const ChshSettings& s) {
  s.validate();
  auto e = [&](const Observable& a, const Observable& b) { return expectation(rho, tensor_product(a, b)); };
  return e(s.a0, s.b0) + e(s.a0, s.b1) + e(s.a1, s.b0) - e(s.a1, s.b1);
}

namespace {

Eigen::Matrix3d correlation_tensor(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw StateError("correlation_tensor: two-qubit state required");
  const char names[3] = {'X', 'Y', 'Z'};
  Eigen::Matrix3d t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      t(i, j) = (kron(pauli_matrix(names[i]), pauli_matrix(names[j])) * rho.matrix()).trace().real();
    }
  }
  return t;
}

Observable bloch_observable(const Eigen::Vector3d& n) {
  return Observable(n(0) * pauli_matrix('X') + n(1) * pauli_matrix('Y') + n(2) * pauli_matrix('Z'));
}

}  // namespace

double max_chsh(const DensityMatrix& rho) {
  const Eigen::Matrix3d t = correlation_tensor(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t.transpose() * t);
  return 2.0 * std::sqrt(std::max(0.0, es.eigenvalues()(2) + es.eigenvalues()(1)));
}

ChshSettings optimal_chsh_settings(const DensityMatrix& rho) {
  const Eigen::Matrix3d t = correlation_tensor(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t.transpose() * t);
  const Eigen::Vector3d c = es.eigenvectors().col(2);
  const Eigen::Vector3d cp = es.eigenvectors().col(1);
  const Eigen::Vector3d tc = t * c;
  const Eigen::Vector3d tcp = t * cp;
  const double n1 = tc.norm();
  const double n2 = tcp.norm();
  const double theta = std::atan2(n2, n1);
  const Eigen::Vector3d a0 = n1 > 1e-15 ? Eigen::Vector3d(tc / n1) : Eigen::Vector3d::UnitX();
  Eigen::Vector3d a1 = n2 > 1e-15 ? Eigen::Vector3d(tcp / n2) : Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d b0 = std::cos(theta) * c + std::sin(theta) * cp;
  const Eigen::Vector3d b1 = std::cos(theta) * c - std::sin(theta) * cp;
  return {bloch_observable(a0), bloch_observable(a1), bloch_observable(b0), bloch_observable(b1)};
}

double werner_equivalent_chsh(double bell_fidelity) {
  if (bell_fidelity < 0.0 || bell_fidelity > 1.0) {
    throw ParameterError("werner_equivalent_chsh: fidelity outside [0, 1]");
  }
  return 2.0 * std::numbers::sqrt2 * (4.0 * bell_fidelity - 1.0) / 3.0;
}

std::array<CountRecord, 4> simulate_chsh_counts(const DensityMatrix& rho, const ChshSettings& s,
                                                long long shots_per_pair, double snr, const CounterRng& rng) {
  s.validate();
  if (shots_per_pair <= 0) throw ParameterError("simulate_chsh_counts: shots must be > 0");
  const DensityMatrix noisy = photon::dark_noise_admixture(rho, snr);
  const std::pair<const Observable*, const Observable*> pairs[4] = {
      {&s.a0, &s.b0}, {&s.a0, &s.b1}, {&s.a1, &s.b0}, {&s.a1, &s.b1}};
  std::array<CountRecord, 4> out;
  for (int i = 0; i < 4; ++i) {
    Eigen::SelfAdjointEigenSolver<CMatrix> ea(pairs[i].first->matrix());
    Eigen::SelfAdjointEigenSolver<CMatrix> eb(pairs[i].second->matrix());
    std::array<double, 4> p{};
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      // eigenvalues ascend, so column 1 is the +1 eigenvector
      const CVector va = ea.eigenvectors().col(k / 2 == 0 ? 1 : 0);
      const CVector vb = eb.eigenvectors().col(k % 2 == 0 ? 1 : 0);
      const CVector v = kron(va, vb);
      p[k] = std::max(0.0, (v.adjoint() * noisy.matrix() * v)(0, 0).real());
      sum += p[k];
    }
    for (double& x : p) x /= sum;
    CounterRng child = rng.child(static_cast<std::uint64_t>(i));
    const auto n = sample_multinomial(shots_per_pair, p, child);
    out[i].shots = static_cast<double>(shots_per_pair);
    for (int k = 0; k < 4; ++k) out[i].counts[k] = static_cast<double>(n[k]);
  }
  return out;
}

double chsh_from_counts(const std::array<CountRecord, 4>& pairs) {
  double e[4];
  for (int i = 0; i < 4; ++i) {
    const auto& c = pairs[i].counts;
    if (!(pairs[i].shots > 0.0)) throw StateError("chsh_from_counts: pair with zero shots");
    e[i] = (c[0] - c[1] - c[2] + c[3]) / pairs[i].shots;
  }
  return e[0] + e[1] + e[2] - e[3];
}

// ---------------------------------------------------------------------------

Statistic fidelity_statistic(double phi) {
  const PureState target = bell_state(phi);
  return [target](const DensityMatrix& rho) { return fidelity(rho, target); };
}

Statistic chsh_statistic(const ChshSettings& s) {
  s.validate();
  return [s](const DensityMatrix& rho) { return chsh(rho, s); };
}

Estimate bootstrap_uncertainty(const std::vector<CountRecord>& records, int n_resamples,
                               const Statistic& statistic, const CounterRng& rng, int threads) {
  if (n_resamples < 100) throw ParameterError("bootstrap_uncertainty: need at least 100 resamples");
  for (const auto& r : records) {
    r.validate();
    if (!(r.shots >= 1.0)) throw StateError("bootstrap_uncertainty: record with zero shots");
  }
  std::vector<double> values(static_cast<size_t>(n_resamples));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&]() {
    for (int i = next++; i < n_resamples && !failed; i = next++) {
      try {
        CounterRng r = rng.child(static_cast<std::uint64_t>(i));
        std::vector<CountRecord> resampled;
        resampled.reserve(records.size());
        for (size_t j = 0; j < records.size(); ++j) {
          CounterRng rj = r.child(j);
          const auto& rec = records[j];
          std::array<double, 4> p{};
          for (int k = 0; k < 4; ++k) p[k] = rec.counts[k] / rec.shots;
          const long long n = std::llround(rec.shots);
          const auto drawn = sample_multinomial(n, p, rj);
          CountRecord out{rec.setting, {}, static_cast<double>(n)};
          for (int k = 0; k < 4; ++k) out.counts[k] = static_cast<double>(drawn[k]);
          resampled.push_back(out);
        }
        values[static_cast<size_t>(i)] = statistic(mle_reconstruct(resampled).rho);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, n_resamples);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n_resamples;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / (n_resamples - 1))};
}

// ---------------------------------------------------------------------------

void write_counts_csv(const std::vector<CountRecord>& records, std::ostream& os) {
  os << "setting_ion,setting_photon,n_pp,n_pm,n_mp,n_mm\n";
  char buf[200];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%c,%c,%.15g,%.15g,%.15g,%.15g\n", axis_name(r.setting.ion),
                  axis_name(r.setting.photon), r.counts[0], r.counts[1], r.counts[2], r.counts[3]);
    os << buf;
  }
}

std::vector<CountRecord> read_counts_csv(std::istream& is) {
  std::vector<CountRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line.rfind("setting_ion", 0) == 0) continue;
    std::stringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 6 || fields[0].size() != 1 || fields[1].size() != 1) {
      throw StateError("read_counts_csv: malformed line " + std::to_string(lineno));
    }
    CountRecord r{{axis_from_name(fields[0][0]), axis_from_name(fields[1][0])}, {}, 0.0};
    for (int k = 0; k < 4; ++k) {
      r.counts[k] = std::stod(fields[2 + k]);
      r.shots += r.counts[k];
    }
    r.validate();
    out.push_back(r);
  }
  return out;
}

}  // namespace hetlink::tomo
