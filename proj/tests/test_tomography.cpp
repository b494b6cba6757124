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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hetlink/scenario.hpp"
#include "hetlink/tomography.hpp"
#include "test_support.hpp"

namespace hetlink {
namespace {

using testing::kPropertyCases;
using testing::max_abs;
using tomo::Axis;
using tomo::ChshSettings;
using tomo::CountRecord;
using tomo::MeasurementSetting;

const double kTsirelson = 2.0 * std::numbers::sqrt2;
const DensityMatrix kBell = DensityMatrix::from_pure(bell_state(0.0));

DensityMatrix werner(double p) { return mix(kBell, DensityMatrix::maximally_mixed(4), p); }

void expect_physical(const DensityMatrix& rho) {
  EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
  EXPECT_LT(max_abs(rho.matrix() - rho.matrix().adjoint()), 1e-14);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix());
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(CountsTest, BellZZPattern) {
  const auto p = tomo::outcome_probabilities(kBell, {Axis::Z, Axis::Z}, std::numeric_limits<double>::infinity());
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.0, 1e-15);
  EXPECT_NEAR(p[2], 0.0, 1e-15);
  EXPECT_NEAR(p[3], 0.5, 1e-15);
  CounterRng rng(61);
  const CountRecord r = tomo::simulate_counts(kBell, {Axis::Z, Axis::Z}, 1000, 1e300, rng);
  EXPECT_EQ(r.counts[1] + r.counts[2], 0.0);
  EXPECT_EQ(r.counts[0] + r.counts[3], 1000.0);
}

TEST(CountsTest, MixedStateIsFlat) {
  CounterRng rng(62);
  for (const auto& s : tomo::all_settings()) {
    const CountRecord r = tomo::simulate_counts(DensityMatrix::maximally_mixed(4), s, 40000, 28.0, rng);
    for (double c : r.counts) EXPECT_NEAR(c, 10000.0, 5 * std::sqrt(10000.0 * 0.75));
  }
}

TEST(CountsTest, DarkNoiseShiftsTowardQuarter) {
  for (const auto& s : tomo::all_settings()) {
    const auto clean = tomo::outcome_probabilities(kBell, s, std::numeric_limits<double>::infinity());
    const auto noisy = tomo::outcome_probabilities(kBell, s, 28.0);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(noisy[k] - clean[k], (0.25 - clean[k]) / 29.0, 1e-15);
  }
}

TEST(CountsTest, Validation) {
  CountRecord r{{Axis::Z, Axis::Z}, {1, 2, 3, 4}, 10};
  EXPECT_NO_THROW(r.validate());
  r.shots = 11;
  EXPECT_THROW(r.validate(), StateError);
  r = {{Axis::Z, Axis::Z}, {-1, 2, 3, 6}, 10};
  EXPECT_THROW(r.validate(), StateError);
  CounterRng rng(1);
  EXPECT_THROW(tomo::simulate_counts(kBell, {Axis::Z, Axis::Z}, 0, 28.0, rng), ParameterError);
}

TEST(MleTest, MixedStateFromMillionShots) {
  const auto recs = tomo::simulate_tomography(DensityMatrix::maximally_mixed(4), 9'000'000, 1e300, CounterRng(63));
  const auto res = tomo::mle_reconstruct(recs);
  EXPECT_LT(trace_distance(res.rho, DensityMatrix::maximally_mixed(4)), 0.01);
}

TEST(MleTest, BellFromExactCounts) {
  const auto res = tomo::mle_reconstruct(tomo::exact_tomography(kBell, 1e6));
  EXPECT_GE(fidelity(res.rho, bell_state(0.0)), 0.999);
  expect_physical(res.rho);
}

TEST(MleTest, RejectsIncompleteData) {
  auto recs = tomo::exact_tomography(kBell, 100.0);
  recs.pop_back();
  EXPECT_ANY_THROW(tomo::mle_reconstruct(recs));
  recs = tomo::exact_tomography(kBell, 100.0);
  recs[8] = recs[0];
  EXPECT_ANY_THROW(tomo::mle_reconstruct(recs));
  recs = tomo::exact_tomography(kBell, 100.0);
  recs[3].counts = {0, 0, 0, 0};
  recs[3].shots = 0;
  EXPECT_ANY_THROW(tomo::mle_reconstruct(recs));
}

TEST(MleTest, ReportsIterationCapAsConvergenceError) {
  tomo::MleOptions opt;
  opt.max_iterations = 1;
  CounterRng rng(64);
  const auto recs = tomo::simulate_tomography(testing::random_density(4, rng), 9000, 28.0, rng);
  try {
    tomo::mle_reconstruct(recs, opt);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(MleTest, PipelineFidelityFromHeralds) {
  const auto cfg = scenario::load_config(testing::load_defaults(), {HETLINK_DATA_DIR});
  const auto pr = link::run_pipeline(scenario::pipeline_params(cfg, "ti_qm"));
  const auto recs = tomo::simulate_tomography(pr.measured, 1780, 1e300, CounterRng(65));
  const double f = fidelity(tomo::mle_reconstruct(recs).rho, bell_state(0.0));
  EXPECT_NEAR(f, 0.892, 0.025 * 3);
  const auto boot = tomo::bootstrap_uncertainty(recs, 200, tomo::fidelity_statistic(), CounterRng(66));
  EXPECT_NEAR(boot.stddev, 0.0223, 0.5 * 0.0223);
}

// ---------------------------------------------------------------------------

TEST(ChshTest, Examples) {
  EXPECT_NEAR(tomo::chsh(kBell, ChshSettings::xz()), kTsirelson, 1e-12);
  EXPECT_NEAR(tomo::max_chsh(kBell), kTsirelson, 1e-12);
  EXPECT_NEAR(tomo::chsh(DensityMatrix::maximally_mixed(4), ChshSettings::xz()), 0.0, 1e-15);
  EXPECT_NEAR(tomo::chsh(werner(0.823), ChshSettings::xz()), kTsirelson * 0.823, 1e-12);
  EXPECT_NEAR(kTsirelson * 0.823, 2.328, 0.001);
  EXPECT_NEAR(tomo::werner_equivalent_chsh((1.0 + 3.0 * 0.823) / 4.0), kTsirelson * 0.823, 1e-12);
  // A0 = X, A1 = Z with B0 = Z, B1 = X reaches only the local bound.
  EXPECT_NEAR(tomo::chsh(kBell, ChshSettings::xz(0.0, std::numbers::pi / 2)), 2.0, 1e-12);
}

TEST(ChshTest, OptimalSettingsReachMaximum) {
  CounterRng rng(71);
  for (int i = 0; i < 50; ++i) {
    const DensityMatrix rho = testing::random_density(4, rng, 1);
    const ChshSettings s = tomo::optimal_chsh_settings(rho);
    EXPECT_NO_THROW(s.validate());
    EXPECT_NEAR(tomo::chsh(rho, s), tomo::max_chsh(rho), 1e-9);
  }
}

TEST(ChshTest, RejectsNonDichotomicObservables) {
  ChshSettings s = ChshSettings::xz();
  s.b1 = Observable(0.5 * pauli_matrix('Z'));
  EXPECT_THROW(s.validate(), StateError);
}

TEST(ChshTest, CountsEstimateConverges) {
  const DensityMatrix rho = werner(0.823);
  const auto pairs = tomo::simulate_chsh_counts(rho, ChshSettings::xz(), 250000, 1e300, CounterRng(72));
  EXPECT_NEAR(tomo::chsh_from_counts(pairs), tomo::chsh(rho, ChshSettings::xz()), 0.01);
}

// ---------------------------------------------------------------------------

TEST(BootstrapTest, LargeShotCountsAreTight) {
  const auto recs = tomo::exact_tomography(kBell, 1e6 / 9.0, 28.0);
  const auto e = tomo::bootstrap_uncertainty(recs, 100, tomo::fidelity_statistic(), CounterRng(81));
  EXPECT_LT(e.stddev, 0.002);
  EXPECT_NEAR(e.mean, fidelity(werner(28.0 / 29.0), bell_state(0.0)), 0.002);
}

TEST(BootstrapTest, ResampleCountsAgree) {
  const auto recs = tomo::simulate_tomography(werner(0.85), 1780, 1e300, CounterRng(82));
  const auto a = tomo::bootstrap_uncertainty(recs, 100, tomo::fidelity_statistic(), CounterRng(83));
  const auto b = tomo::bootstrap_uncertainty(recs, 1000, tomo::fidelity_statistic(), CounterRng(83));
  EXPECT_NEAR(a.mean, b.mean, b.stddev);
  EXPECT_NEAR(a.stddev, b.stddev, 0.5 * b.stddev);
}

TEST(BootstrapTest, ThreadCountDoesNotChangeResult) {
  const auto recs = tomo::simulate_tomography(werner(0.85), 1780, 1e300, CounterRng(84));
  const auto a = tomo::bootstrap_uncertainty(recs, 100, tomo::fidelity_statistic(), CounterRng(85), 1);
  const auto b = tomo::bootstrap_uncertainty(recs, 100, tomo::fidelity_statistic(), CounterRng(85), 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.stddev, b.stddev);
}

TEST(BootstrapTest, RejectsBadInput) {
  const auto recs = tomo::exact_tomography(kBell, 100.0);
  EXPECT_THROW(tomo::bootstrap_uncertainty(recs, 99, tomo::fidelity_statistic(), CounterRng(1)), ParameterError);
  auto zero = recs;
  zero[0].counts = {0, 0, 0, 0};
  zero[0].shots = 0;
  EXPECT_THROW(tomo::bootstrap_uncertainty(zero, 100, tomo::fidelity_statistic(), CounterRng(1)), StateError);
}

TEST(CsvTest, RoundTrip) {
  const auto recs = tomo::simulate_tomography(werner(0.9), 1780, 28.0, CounterRng(91));
  std::stringstream ss;
  tomo::write_counts_csv(recs, ss);
  EXPECT_EQ(ss.str().rfind("setting_ion,setting_photon,n_pp,n_pm,n_mp,n_mm", 0), 0u);
  const auto back = tomo::read_counts_csv(ss);
  ASSERT_EQ(back.size(), recs.size());
  for (size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].setting, recs[i].setting);
    EXPECT_EQ(back[i].counts, recs[i].counts);
    EXPECT_EQ(back[i].shots, recs[i].shots);
  }
}

// ---------------------------------------------------------------------------

TEST(TomographyProperty, ExactCountsRecoverRandomStates) {
  CounterRng rng(1001);
  for (int i = 0; i < 50; ++i) {
    const DensityMatrix rho = testing::random_density(4, rng);
    const auto res = tomo::mle_reconstruct(tomo::exact_tomography(rho, 1e4));
    ASSERT_LT(trace_distance(res.rho, rho), 1e-6) << "case " << i;
  }
}

TEST(TomographyProperty, SampledCountsMedianTraceDistance) {
  CounterRng rng(1002);
  std::vector<double> d;
  for (int i = 0; i < 50; ++i) {
    const DensityMatrix rho = testing::random_density(4, rng);
    const auto recs = tomo::simulate_tomography(rho, 9 * 10000, 1e300, rng.child(i));
    d.push_back(trace_distance(tomo::mle_reconstruct(recs).rho, rho));
  }
  std::nth_element(d.begin(), d.begin() + 25, d.end());
  EXPECT_LT(d[25], 0.02);
}

TEST(TomographyProperty, AdversarialCountsStayPhysical) {
  CounterRng rng(1003);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int i = 0; i < 200; ++i) {
    std::vector<CountRecord> recs;
    for (const auto& s : tomo::all_settings()) {
      CountRecord r{s, {0, 0, 0, 0}, 50};
      r.counts[pick(rng)] = 50;
      recs.push_back(r);
    }
    const auto res = tomo::mle_reconstruct(recs);
    expect_physical(res.rho);
  }
}

TEST(TomographyProperty, ChshIsLinearAndBounded) {
  CounterRng rng(1004);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < kPropertyCases; ++i) {
    const ChshSettings s{testing::random_pm1(rng), testing::random_pm1(rng), testing::random_pm1(rng),
                         testing::random_pm1(rng)};
    const DensityMatrix a = testing::random_density(4, rng, 1 + i % 4);
    const DensityMatrix b = testing::random_density(4, rng);
    const double w = u(rng);
    ASSERT_LE(std::abs(tomo::chsh(a, s)), kTsirelson + 1e-9);
    ASSERT_LE(tomo::max_chsh(a), kTsirelson + 1e-9);
    ASSERT_NEAR(tomo::chsh(mix(a, b, w), s), w * tomo::chsh(a, s) + (1 - w) * tomo::chsh(b, s), 1e-12);
  }
}

TEST(TomographyProperty, ProductStatesRespectLocalBound) {
  CounterRng rng(1005);
  for (int i = 0; i < kPropertyCases; ++i) {
    const ChshSettings s{testing::random_pm1(rng), testing::random_pm1(rng), testing::random_pm1(rng),
                         testing::random_pm1(rng)};
    const DensityMatrix ion = testing::random_density(2, rng);
    const DensityMatrix photon = testing::random_density(2, rng);
    const DensityMatrix rho = tensor_product(ion, photon);
    ASSERT_LE(std::abs(tomo::chsh(rho, s)), 2.0 + 1e-9);
  }
  // Deterministic +-1 assignments.
  for (int m = 0; m < 16; ++m) {
    const int a0 = m & 1 ? 1 : -1, a1 = m & 2 ? 1 : -1, b0 = m & 4 ? 1 : -1, b1 = m & 8 ? 1 : -1;
    ASSERT_LE(std::abs(a0 * b0 + a0 * b1 + a1 * b0 - a1 * b1), 2);
  }
}

}  // namespace
}  // namespace hetlink
