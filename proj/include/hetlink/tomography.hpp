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

// Two-qubit state tomography over the 3x3 Pauli basis grid, maximum
// likelihood reconstruction, CHSH evaluation and bootstrap errors.

#ifndef HETLINK_TOMOGRAPHY_HPP
#define HETLINK_TOMOGRAPHY_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "hetlink/qstate.hpp"
#include "hetlink/rng.hpp"

namespace hetlink::tomo {

enum class Axis { Z, X, Y };

char axis_name(Axis a);
Axis axis_from_name(char c);

struct MeasurementSetting {
  Axis ion = Axis::Z;
  Axis photon = Axis::Z;

  bool operator==(const MeasurementSetting&) const = default;
};

/// The nine settings, ion axis major, in Z, X, Y order.
std::array<MeasurementSetting, 9> all_settings();

/// Outcome order ++, +-, -+, --. Counts may be fractional when they hold
/// exact expected values.
struct CountRecord {
  MeasurementSetting setting;
  std::array<double, 4> counts{};
  double shots = 0.0;

  /// Throws StateError if counts are negative or do not sum to shots.
  void validate() const;
};

/// Projector onto outcome `k` (0..3) of `s`.
CMatrix outcome_projector(const MeasurementSetting& s, int k);

/// Born-rule probabilities of the four outcomes after mixing rho with
/// I/4 at fraction 1/(snr + 1).
std::array<double, 4> outcome_probabilities(const DensityMatrix& rho, const MeasurementSetting& s,
                                            double snr);

/// Multinomial counts. Deterministic for a given generator state.
CountRecord simulate_counts(const DensityMatrix& rho, const MeasurementSetting& s, long long shots,
                            double snr, CounterRng& rng);

/// All nine settings; heralds split evenly with the remainder going to the
/// first settings. Setting i draws from rng.child(i).
std::vector<CountRecord> simulate_tomography(const DensityMatrix& rho, long long total_shots, double snr,
                                             const CounterRng& rng);

/// Expected counts shots * p for every setting (no sampling noise).
std::vector<CountRecord> exact_tomography(const DensityMatrix& rho, double shots_per_setting,
                                          double snr = std::numeric_limits<double>::infinity());

struct MleOptions {
  int max_iterations = 10000;
  double rel_loglik_tol = 1e-10;
  double stationarity_tol = 1e-10;  // lambda_max(R) - 1
};

struct MleResult {
  DensityMatrix rho;
  double log_likelihood;
  int iterations;
  double stationarity;  // final lambda_max(R) - 1, an upper bound on LL* - LL per shot
};

/// Damped Newton ascent on rho = T^dag T / tr(T^dag T), T lower triangular,
/// from I/4. Stops when the relative log-likelihood gain and lambda_max(R) - 1
/// both fall below tolerance, with R = sum_k (f_k / p_k) Pi_k. Rejects
/// duplicate, missing or empty settings. Throws ConvergenceError carrying the
/// final gap if the iteration cap is reached.
MleResult mle_reconstruct(const std::vector<CountRecord>& records, const MleOptions& opt = {});

// ---------------------------------------------------------------------------

struct ChshSettings {
  Observable a0, a1, b0, b1;

  /// Throws StateError unless each observable is a 2x2 matrix with
  /// eigenvalues +-1.
  void validate() const;

  /// A0 = X, A1 = Z on the ion; B0, B1 = cos t Z + sin t X on the photon.
  /// The defaults are optimal for the phi = 0 Bell state.
  static ChshSettings xz(double theta_b0 = std::numbers::pi / 4, double theta_b1 = 3 * std::numbers::pi / 4);
};

/// <A0 B0> + <A0 B1> + <A1 B0> - <A1 B1>.
double chsh(const DensityMatrix& rho, const ChshSettings& s);

/// Settings reaching the maximal S for rho, from the top two singular
/// directions of the correlation tensor.
ChshSettings optimal_chsh_settings(const DensityMatrix& rho);

/// 2 sqrt(m1 + m2) for the two largest eigenvalues of T^T T.
double max_chsh(const DensityMatrix& rho);

/// 2 sqrt(2) p for the Werner state whose Bell fidelity is F.
double werner_equivalent_chsh(double bell_fidelity);

/// Correlator counts for the four CHSH pairs in the order (A0,B0), (A0,B1),
/// (A1,B0), (A1,B1). Pair i draws from rng.child(i).
std::array<CountRecord, 4> simulate_chsh_counts(const DensityMatrix& rho, const ChshSettings& s,
                                                long long shots_per_pair, double snr, const CounterRng& rng);
double chsh_from_counts(const std::array<CountRecord, 4>& pairs);

// ---------------------------------------------------------------------------

struct Estimate {
  double mean;
  double stddev;
};

using Statistic = std::function<double(const DensityMatrix&)>;

/// Multinomial resampling of every record, re-estimation with MLE, sample
/// standard deviation. Resample i draws from rng.child(i); threads only
/// change wall time.
Estimate bootstrap_uncertainty(const std::vector<CountRecord>& records, int n_resamples,
                               const Statistic& statistic, const CounterRng& rng, int threads = 0);

/// Bell-fidelity and CHSH statistics against bell_state(phi).
Statistic fidelity_statistic(double phi = 0.0);
Statistic chsh_statistic(const ChshSettings& s);

// ---------------------------------------------------------------------------

void write_counts_csv(const std::vector<CountRecord>& records, std::ostream& os);
std::vector<CountRecord> read_counts_csv(std::istream& is);

}  // namespace hetlink::tomo

#endif  // HETLINK_TOMOGRAPHY_HPP
