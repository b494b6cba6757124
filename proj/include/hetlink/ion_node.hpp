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

// Trapped-ion node: entangled emission, pulsed excitation, threshold readout
// and qubit decoherence.

#ifndef HETLINK_ION_NODE_HPP
#define HETLINK_ION_NODE_HPP

#include <numbers>
#include <span>

#include "hetlink/qstate.hpp"
#include "hetlink/rng.hpp"

namespace hetlink::ion {

struct IonParams {
  double zeeman_omega = 2.0 * std::numbers::pi * 11.22e6;  // rad/s
  double coherence_time_ms = 0.989;
  double excited_lifetime_spectral_ns = 8.12;
  double excited_lifetime_temporal_ns = 8.05;
  double branching_s12 = 0.995;
  double pi_excitation_prob = 0.960;

  void validate() const;
};

/// (|1'>|s+> + e^{i phi}|1>|s->)/sqrt(2) with phi = omega * t - phi_comp.
PureState emit_entangled_state(const IonParams& params, double t_elapsed_ns, double phi_comp);

/// Phase that cancels the Zeeman evolution accumulated over `t_ns`.
double compensation_phase(const IonParams& params, double t_ns);

// P_bright = (2A/3) sin^2(alpha E^{beta/2} / 2);  P_e = P_bright / (2/3).
struct ExcitationFit {
  double amplitude = 0.960;            // A
  double alpha = std::numbers::pi;     // pulse-area coefficient
  double beta = 2.0;                   // energy exponent
  double energy = 1.0;                 // E, arbitrary units

  void validate() const;
};

double bright_population(const ExcitationFit& fit);
double excitation_probability(const ExcitationFit& fit);

// ---------------------------------------------------------------------------
// Threshold readout

enum class IonLevel { Dark, Bright };

struct SpamParams {
  double mean_bright_counts = 12.0;
  double threshold = 1.5;
  double dark_fidelity = 0.998;
  double bright_fidelity = 0.987;
  // Negative means "calibrate from the fidelities" (see calibrate_spam).
  double leak_per_scatter = -1.0;
  double dark_background_mean = -1.0;

  void validate() const;
};

/// Fills leak_per_scatter and dark_background_mean so that the readout model
/// reproduces the configured dark and bright fidelities exactly.
///
/// Bright: counts = min(N, G) with N ~ Poisson(mean_bright_counts) and G the
/// number of scattering events before a leak (geometric, per-event leak
/// probability q). P(counts > k) = P(N > k) (1 - q)^(k+1) for integer k = floor(threshold).
/// Dark: counts ~ Poisson(background mean).
SpamParams calibrate_spam(SpamParams params);

/// P(misread) for each level under the model, for checks and reports.
double dark_error_probability(const SpamParams& params);
double bright_error_probability(const SpamParams& params);

struct ReadoutShot {
  long long counts;
  IonLevel verdict;
};

/// One readout shot. Requires calibrated (non-negative) leak and background.
ReadoutShot simulate_spam_readout(IonLevel true_level, const SpamParams& params, CounterRng& rng);

// ---------------------------------------------------------------------------
// Decoherence

/// exp(-(t / tau_co)^a).
double coherence_factor(const IonParams& params, double t_us, double exponent_a = 2.0);

/// Ion-qubit dephasing on the two-qubit space; Bell-state fidelity after the
/// channel is (1 + exp(-(t/tau_co)^a)) / 2.
QuantumChannel decoherence_channel(const IonParams& params, double t_us, double exponent_a = 2.0);

// Scalar error sources measured on the ion, mapped onto channels that lower
// the Bell-state fidelity by exactly `infidelity`.

/// Readout/rotation errors: single-qubit depolarizing on the ion.
QuantumChannel ion_depolarizing_error(double infidelity);

// ---------------------------------------------------------------------------
// Ramsey characterization

struct RamseyParams {
  double offset_c = 0.5;
  double amplitude_d = 0.5;
  double frequency_hz = 10e3;     // omega_R
  double phase0 = 0.0;            // phi_R0
  double coherence_time_s = 0.989e-3;
};

/// C + D exp(-(t/tau_co)^2) cos(2 pi omega_R t + phi_R0), t in seconds.
double ramsey_curve(double t_s, const RamseyParams& p);

struct RamseyFit {
  RamseyParams params;
  double coherence_time_stderr_s;
  double residual_rms;
};

/// Levenberg-Marquardt fit of ramsey_curve to (t, p) samples.
RamseyFit fit_ramsey(std::span<const double> t_s, std::span<const double> p_bright,
                     const RamseyParams& initial);

}  // namespace hetlink::ion

#endif  // HETLINK_ION_NODE_HPP
