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

#include "hetlink/memory.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace hetlink::memory {

using std::numbers::pi;

void CombParams::validate() const {
  if (!(d > 0.0)) throw ParameterError("CombParams: d must be > 0");
  if (!(gamma_comb_khz >= 0.0)) throw ParameterError("CombParams: gamma_comb must be >= 0");
  if (finesse && !(*finesse > 0.0)) throw ParameterError("CombParams: finesse must be > 0");
  if (!finesse && !(delta_mhz && gamma_comb_khz > 0.0)) {
    throw ParameterError("CombParams: need a finesse or a tooth spacing with nonzero width");
  }
  if (delta_mhz) {
    if (!(*delta_mhz > 0.0)) throw ParameterError("CombParams: delta must be > 0");
    if (!(bandwidth_mhz > *delta_mhz)) throw ParameterError("CombParams: bandwidth must exceed delta");
    if (finesse && gamma_comb_khz > 0.0) {
      const double implied = *delta_mhz * 1e3 / gamma_comb_khz;
      if (std::abs(implied - *finesse) > 1e-6) {
        throw ParameterError("CombParams: finesse disagrees with delta / gamma_comb");
      }
    }
  }
}

double CombParams::effective_finesse() const {
  return finesse ? *finesse : *delta_mhz * 1e3 / gamma_comb_khz;
}

double afc_efficiency(const CombParams& c, double t_storage_ns) {
  c.validate();
  if (t_storage_ns < 0.0) throw ParameterError("afc_efficiency: negative storage time");
  const double b = kCombShapeB;
  const double ratio = c.d / c.effective_finesse();
  const double t = t_storage_ns * 1e-9;
  const double gamma = c.gamma_comb_khz * 1e3;
  const double eta = b * b * ratio * ratio * std::exp(-b * ratio - 2.0 * pi * b * b * t * t * gamma * gamma);
  return std::clamp(eta, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

void SpectralModel::validate() const {
  if (!(gamma_natural_mhz > 0.0)) throw ParameterError("SpectralModel: linewidth must be > 0");
  if (!(zeeman_split_mhz >= 0.0)) throw ParameterError("SpectralModel: Zeeman split must be >= 0");
  if (!(qm_bandwidth_mhz > 0.0)) throw ParameterError("SpectralModel: memory bandwidth must be > 0");
}

double spectral_density(double f_mhz, const SpectralModel& m) {
  const double hw = 0.5 * m.gamma_natural_mhz;
  const double c = 0.5 * m.zeeman_split_mhz;
  const double h2 = hw * hw;
  return h2 / ((f_mhz - c) * (f_mhz - c) + h2) + h2 / ((f_mhz + c) * (f_mhz + c) + h2);
}

double bandwidth_match(const SpectralModel& m) {
  m.validate();
  if (std::isinf(m.qm_bandwidth_mhz)) return 1.0;
  constexpr double kTol = 1e-8;
  auto s = [&](double f) { return spectral_density(f, m); };

  const double lo = -0.5 * m.qm_bandwidth_mhz + m.detuning_mhz;
  const double hi = 0.5 * m.qm_bandwidth_mhz + m.detuning_mhz;
  const double inside = adaptive_simpson(s, lo, hi, kTol);

  // Full-line integral: numerical core on [-10 G, 10 G] plus the exact
  // Lorentzian tails beyond it.
  const double hw = 0.5 * m.gamma_natural_mhz;
  const double c = 0.5 * m.zeeman_split_mhz;
  const double edge = 10.0 * m.gamma_natural_mhz;
  const double core = adaptive_simpson(s, -edge, edge, kTol);
  double tails = 0.0;
  for (double centre : {c, -c}) {
    // integral of h^2/((f-c)^2+h^2) over |f| > edge
    tails += hw * (0.5 * pi - std::atan((edge - centre) / hw));
    tails += hw * (0.5 * pi - std::atan((edge + centre) / hw));
  }
  return inside / (core + tails);
}

// ---------------------------------------------------------------------------

void StarkControl::validate() const {
  if (!(shift_rate_khz_per_v_cm > 0.0)) throw ParameterError("StarkControl: shift rate must be > 0");
  if (!(pulse_duration_ns > 0.0)) throw ParameterError("StarkControl: pulse duration must be > 0");
  if (!(echo_period_ns > 0.0)) throw ParameterError("StarkControl: echo period must be > 0");
  if (readout_order_n < 1 || readout_order_n > kMaxReadoutOrder) {
    throw ParameterError("StarkControl: readout order must lie in [1, " +
                         std::to_string(kMaxReadoutOrder) + "]");
  }
}

double smafc_readout_time(const StarkControl& s) {
  s.validate();
  const double period = s.echo_period_ns;
  const int n = s.readout_order_n;
  const double first_end = s.first_pulse_start_ns + s.pulse_duration_ns;
  if (s.first_pulse_start_ns < 0.0 || first_end > period) {
    throw ParameterError("smafc_readout_time: first pulse must finish before the first echo at " +
                         std::to_string(period) + " ns");
  }
  if (!s.second_pulse_reversed) {
    throw ParameterError("smafc_readout_time: second pulse must have reversed polarity");
  }
  const double lo = (n - 1) * period;
  const double hi = n * period;
  const double second = s.second_pulse_start_ns.value_or(std::max(lo, first_end) + 0.5 * (hi - std::max(lo, first_end)));
  if (second < first_end) {
    throw ParameterError("smafc_readout_time: second pulse overlaps the first");
  }
  if (!(second > lo && second <= hi)) {
    throw ParameterError("smafc_readout_time: second pulse outside the window of echo order " +
                         std::to_string(n));
  }
  return n * period;
}

double echo_period_ns(double delta_mhz) {
  if (!(delta_mhz > 0.0)) throw ParameterError("echo_period_ns: delta must be > 0");
  return 1e3 / delta_mhz;
}

double stark_splitting(double field_v_cm, double rate_khz_per_v_cm) {
  if (!(rate_khz_per_v_cm > 0.0)) throw ParameterError("stark_splitting: rate must be > 0");
  return rate_khz_per_v_cm * field_v_cm;
}

double mean_stark_rate(double plus_rate, double minus_rate) {
  return 0.5 * (std::abs(plus_rate) + std::abs(minus_rate));
}

// ---------------------------------------------------------------------------

QuantumChannel storage_channel(double eta_h, double eta_v) {
  if (eta_h < 0.0 || eta_h > 1.0 || eta_v < 0.0 || eta_v > 1.0) {
    throw ParameterError("storage_channel: efficiencies must lie in [0, 1]");
  }
  CMatrix k = CMatrix::Zero(2, 2);
  k(0, 0) = std::sqrt(eta_h);
  k(1, 1) = std::sqrt(eta_v);
  return QuantumChannel({k}, false).on(Subsystem::Photon);
}

double storage_herald_probability(const DensityMatrix& rho, double eta_h, double eta_v) {
  const DensityMatrix photon = partial_trace(rho, Subsystem::Photon);
  return eta_h * photon(0, 0).real() + eta_v * photon(1, 1).real();
}

QuantumChannel storage_residual_channel(double infidelity) {
  if (infidelity < 0.0 || infidelity > 0.5) {
    throw ParameterError("storage_residual_channel: infidelity outside [0, 0.5]");
  }
  return dephasing(1.0 - 2.0 * infidelity).on(Subsystem::Photon);
}

double mean_probe_infidelity(std::span<const double> probe_fidelities) {
  if (probe_fidelities.empty()) throw ParameterError("mean_probe_infidelity: no probes");
  const double sum = std::accumulate(probe_fidelities.begin(), probe_fidelities.end(), 0.0);
  return 1.0 - sum / static_cast<double>(probe_fidelities.size());
}

}  // namespace hetlink::memory
