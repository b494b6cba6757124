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

// Atomic-frequency-comb memory: comb efficiency, spectral matching with the
// ion's photons, Stark-controlled readout and the heralded storage channel.

#ifndef HETLINK_MEMORY_HPP
#define HETLINK_MEMORY_HPP

#include <optional>
#include <span>

#include "hetlink/qstate.hpp"

namespace hetlink::memory {

struct CombParams {
  double d = 10.5;                       // absorption depth
  std::optional<double> finesse = 7.7;   // Delta / gamma_comb
  double gamma_comb_khz = 259.8;         // tooth FWHM
  std::optional<double> delta_mhz;       // tooth spacing
  double bandwidth_mhz = 48.2;

  void validate() const;
  /// The configured finesse, or delta / gamma_comb when only the spacing is set.
  double effective_finesse() const;
};

/// Gaussian-tooth comb efficiency
///   B^2 (d/F)^2 exp(-B d/F - 2 pi B^2 t^2 gamma^2),  B = sqrt(pi / (4 ln 2)).
double afc_efficiency(const CombParams& c, double t_storage_ns);

inline const double kCombShapeB = 1.0644670194312262;  // sqrt(pi) / sqrt(4 ln 2)

// ---------------------------------------------------------------------------

struct SpectralModel {
  double gamma_natural_mhz = 19.6;  // Lorentzian FWHM of each circular component
  double zeeman_split_mhz = 11.22;  // sigma+/sigma- separation
  double qm_bandwidth_mhz = 48.2;
  double detuning_mhz = 0.0;        // photon centre minus memory centre

  void validate() const;
};

/// Incoherent sum of two unit-peak Lorentzians centred at +-split/2.
double spectral_density(double f_mhz, const SpectralModel& m);

/// Fraction of the photon spectrum inside the memory's rectangular band,
/// integrated by adaptive Simpson (absolute tolerance 1e-8).
double bandwidth_match(const SpectralModel& m);

/// Adaptive Simpson on [a, b]. Throws ConvergenceError past the depth limit.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 40);

// ---------------------------------------------------------------------------

struct StarkControl {
  double shift_rate_khz_per_v_cm = 5.80;
  double pulse_voltage_v = 8.6;
  double pulse_duration_ns = 100.0;
  double echo_period_ns = 500.0;
  int readout_order_n = 2;
  double first_pulse_start_ns = 100.0;      // after absorption at t = 0
  std::optional<double> second_pulse_start_ns;  // default: just inside the n-th window
  bool second_pulse_reversed = true;

  void validate() const;
};

inline constexpr int kMaxReadoutOrder = 10;

/// On-demand readout time n * echo_period after checking the pulse schedule.
double smafc_readout_time(const StarkControl& s);

/// Echo period 1/Delta in ns for a tooth spacing in MHz.
double echo_period_ns(double delta_mhz);

/// Linear Stark shift rate * field, in kHz.
double stark_splitting(double field_v_cm, double rate_khz_per_v_cm);

/// Mean magnitude of an asymmetric +/- shift-rate pair.
double mean_stark_rate(double plus_rate, double minus_rate);

// ---------------------------------------------------------------------------

/// Polarization-dependent loss diag(sqrt(eta_H), sqrt(eta_V)) on the photon.
/// Trace-decreasing; the output trace is the herald probability.
QuantumChannel storage_channel(double eta_h, double eta_v);

/// eta_H p_H + eta_V p_V for the photon-diagonal populations of rho.
double storage_herald_probability(const DensityMatrix& rho, double eta_h, double eta_v);

/// Photon dephasing that lowers Bell fidelity by `infidelity`. Phenomenological
/// stand-in for the measured residual storage error.
QuantumChannel storage_residual_channel(double infidelity);

/// 1 - mean of the probe-state storage fidelities.
double mean_probe_infidelity(std::span<const double> probe_fidelities);

}  // namespace hetlink::memory

#include "hetlink/detail/adaptive_simpson.hpp"

#endif  // HETLINK_MEMORY_HPP
