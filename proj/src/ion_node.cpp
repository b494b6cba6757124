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

#include "hetlink/ion_node.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/special_functions/gamma.hpp>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace hetlink::ion {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// P(N <= k) for N ~ Poisson(mean).
double poisson_cdf(long long k, double mean) {
  if (k < 0) return 0.0;
  if (mean <= 0.0) return 1.0;
  return boost::math::gamma_q(static_cast<double>(k + 1), mean);
}

long long threshold_floor(const SpamParams& p) {
  return static_cast<long long>(std::floor(p.threshold));
}

}  // namespace

void IonParams::validate() const {
  if (!(zeeman_omega > 0.0)) throw ParameterError("IonParams: zeeman_omega must be > 0");
  if (!(coherence_time_ms > 0.0)) throw ParameterError("IonParams: coherence_time_ms must be > 0");
  if (!(excited_lifetime_spectral_ns > 0.0) || !(excited_lifetime_temporal_ns > 0.0)) {
    throw ParameterError("IonParams: excited-state lifetimes must be > 0");
  }
  if (!is_probability(branching_s12) || !is_probability(pi_excitation_prob)) {
    throw ParameterError("IonParams: probabilities must lie in [0, 1]");
  }
}

PureState emit_entangled_state(const IonParams& params, double t_elapsed_ns, double phi_comp) {
  if (t_elapsed_ns < 0.0) throw ParameterError("emit_entangled_state: negative elapsed time");
  const double phi = params.zeeman_omega * t_elapsed_ns * 1e-9 - phi_comp;
  return bell_state(std::remainder(phi, 2.0 * std::numbers::pi));
}

double compensation_phase(const IonParams& params, double t_ns) {
  return params.zeeman_omega * t_ns * 1e-9;
}

void ExcitationFit::validate() const {
  if (!(amplitude > 0.0 && amplitude <= 1.0)) throw ParameterError("ExcitationFit: A must be in (0, 1]");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ParameterError("ExcitationFit: alpha, beta must be > 0");
  if (energy < 0.0) throw ParameterError("ExcitationFit: pulse energy must be >= 0");
}

double bright_population(const ExcitationFit& fit) {
  fit.validate();
  const double s = std::sin(0.5 * fit.alpha * std::pow(fit.energy, 0.5 * fit.beta));
  return 2.0 * fit.amplitude / 3.0 * s * s;
}

double excitation_probability(const ExcitationFit& fit) {
  return std::clamp(bright_population(fit) / (2.0 / 3.0), 0.0, 1.0);
}

// ---------------------------------------------------------------------------

void SpamParams::validate() const {
  if (!(threshold > 0.0)) throw ParameterError("SpamParams: threshold must be > 0");
  if (!(mean_bright_counts > 0.0)) throw ParameterError("SpamParams: mean_bright_counts must be > 0");
  if (!is_probability(dark_fidelity) || !is_probability(bright_fidelity)) {
    throw ParameterError("SpamParams: fidelities must lie in [0, 1]");
  }
  if (leak_per_scatter > 1.0) throw ParameterError("SpamParams: leak_per_scatter must be <= 1");
}

SpamParams calibrate_spam(SpamParams p) {
  p.validate();
  const long long k = threshold_floor(p);
  const double survive = 1.0 - poisson_cdf(k, p.mean_bright_counts);  // P(N > k)
  if (p.bright_fidelity > survive) {
    throw ParameterError("calibrate_spam: bright fidelity exceeds the Poisson-only limit");
  }
  p.leak_per_scatter = 1.0 - std::pow(p.bright_fidelity / survive, 1.0 / static_cast<double>(k + 1));

  // Solve P(Poisson(mu) <= k) = dark_fidelity.
  if (p.dark_fidelity >= 1.0) {
    p.dark_background_mean = 0.0;
  } else {
    p.dark_background_mean = boost::math::gamma_q_inv(static_cast<double>(k + 1), p.dark_fidelity);
  }
  return p;
}

double dark_error_probability(const SpamParams& p) {
  return 1.0 - poisson_cdf(threshold_floor(p), std::max(0.0, p.dark_background_mean));
}

double bright_error_probability(const SpamParams& p) {
  const long long k = threshold_floor(p);
  const double q = std::max(0.0, p.leak_per_scatter);
  return 1.0 - (1.0 - poisson_cdf(k, p.mean_bright_counts)) * std::pow(1.0 - q, static_cast<double>(k + 1));
}

ReadoutShot simulate_spam_readout(IonLevel true_level, const SpamParams& params, CounterRng& rng) {
  params.validate();
  if (params.leak_per_scatter < 0.0 || params.dark_background_mean < 0.0) {
    throw ParameterError("simulate_spam_readout: parameters are not calibrated");
  }
  long long counts = 0;
  if (true_level == IonLevel::Dark) {
    if (params.dark_background_mean > 0.0) {
      std::poisson_distribution<long long> bg(params.dark_background_mean);
      counts = bg(rng);
    }
  } else {
    std::poisson_distribution<long long> scatter(params.mean_bright_counts);
    counts = scatter(rng);
    if (params.leak_per_scatter >= 1.0) {
      counts = 0;
    } else if (params.leak_per_scatter > 0.0) {
      std::geometric_distribution<long long> until_leak(params.leak_per_scatter);
      counts = std::min(counts, until_leak(rng));
    }
  }
  const IonLevel verdict =
      static_cast<double>(counts) > params.threshold ? IonLevel::Bright : IonLevel::Dark;
  return {counts, verdict};
}

// ---------------------------------------------------------------------------

double coherence_factor(const IonParams& params, double t_us, double exponent_a) {
  if (t_us < 0.0) throw ParameterError("coherence_factor: negative time");
  if (exponent_a < 1.0 || exponent_a > 3.0) {
    throw ParameterError("coherence_factor: exponent must lie in [1, 3]");
  }
  const double ratio = t_us / (params.coherence_time_ms * 1e3);
  return std::exp(-std::pow(ratio, exponent_a));
}

QuantumChannel decoherence_channel(const IonParams& params, double t_us, double exponent_a) {
  return dephasing(coherence_factor(params, t_us, exponent_a)).on(Subsystem::Ion);
}

QuantumChannel ion_depolarizing_error(double infidelity) {
  if (infidelity < 0.0 || infidelity > 0.75) {
    throw ParameterError("ion_depolarizing_error: infidelity outside [0, 0.75]");
  }
  return depolarizing(2, 4.0 * infidelity / 3.0).on(Subsystem::Ion);
}

// ---------------------------------------------------------------------------

double ramsey_curve(double t_s, const RamseyParams& p) {
  if (!(p.coherence_time_s > 0.0)) throw ParameterError("ramsey_curve: tau_co must be > 0");
  const double r = t_s / p.coherence_time_s;
  return p.offset_c +
         p.amplitude_d * std::exp(-r * r) *
             std::cos(2.0 * std::numbers::pi * p.frequency_hz * t_s + p.phase0);
}

namespace {

// Parameters scaled to O(1): (C, D, f [kHz], phi, tau [ms]).
struct RamseyResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  std::span<const double> t;
  std::span<const double> y;

  int inputs() const { return 5; }
  int values() const { return static_cast<int>(t.size()); }

  static RamseyParams unpack(const Eigen::VectorXd& x) {
    return {x(0), x(1), x(2) * 1e3, x(3), std::abs(x(4)) * 1e-3};
  }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
    const RamseyParams p = unpack(x);
    for (size_t i = 0; i < t.size(); ++i) fvec(i) = ramsey_curve(t[i], p) - y[i];
    return 0;
  }
};

}  // namespace

RamseyFit fit_ramsey(std::span<const double> t_s, std::span<const double> p_bright,
                     const RamseyParams& initial) {
  if (t_s.size() != p_bright.size() || t_s.size() < 6) {
    throw ParameterError("fit_ramsey: need at least 6 matching samples");
  }
  RamseyResidual residual{t_s, p_bright};
  Eigen::NumericalDiff<RamseyResidual> functor(residual);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<RamseyResidual>> lm(functor);
  lm.parameters.ftol = 1e-12;
  lm.parameters.xtol = 1e-12;
  lm.parameters.maxfev = 4000;

  Eigen::VectorXd x(5);
  x << initial.offset_c, initial.amplitude_d, initial.frequency_hz * 1e-3, initial.phase0,
      initial.coherence_time_s * 1e3;
  const auto status = lm.minimize(x);
  if (status <= 0) throw ConvergenceError("fit_ramsey: Levenberg-Marquardt failed", lm.fnorm);

  Eigen::VectorXd fvec(residual.values());
  residual(x, fvec);
  const double dof = static_cast<double>(residual.values() - residual.inputs());
  const double sigma2 = fvec.squaredNorm() / dof;

  Eigen::MatrixXd jac(residual.values(), residual.inputs());
  functor.df(x, jac);
  const Eigen::MatrixXd cov = sigma2 * (jac.transpose() * jac).inverse();

  RamseyFit fit;
  fit.params = RamseyResidual::unpack(x);
  fit.coherence_time_stderr_s = std::sqrt(std::max(0.0, cov(4, 4))) * 1e-3;
  fit.residual_rms = std::sqrt(fvec.squaredNorm() / residual.values());
  return fit;
}

}  // namespace hetlink::ion
