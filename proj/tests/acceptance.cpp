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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hetlink/budget.hpp"
#include "hetlink/memory.hpp"
#include "hetlink/pump_planner.hpp"
#include "hetlink/scenario.hpp"
#include "hetlink/tomography.hpp"
#include "test_support.hpp"

namespace {

using namespace hetlink;
using Clock = std::chrono::steady_clock;

constexpr double kPi = std::numbers::pi;
const double kTsirelson = 2.0 * std::numbers::sqrt2;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

// Collects sub-checks; the criterion passes when all of them do.
struct Checks {
  bool ok = true;
  std::vector<std::string> notes;

  void add(bool pass, const std::string& note) {
    ok = ok && pass;
    notes.push_back(std::string(pass ? "" : "[x] ") + note);
  }
  Outcome done() const {
    std::string s;
    for (size_t i = 0; i < notes.size(); ++i) s += (i ? "; " : "") + notes[i];
    return {ok, s};
  }
};

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }
bool within_rel(double v, double target, double rel) { return std::abs(v / target - 1.0) <= rel; }

scenario::ExperimentConfig defaults_for(const std::string& name) {
  nlohmann::json doc = testing::load_defaults();
  doc["scenario"] = name;
  return scenario::load_config(doc, {HETLINK_DATA_DIR});
}

// ---------------------------------------------------------------------------

Outcome bandwidth() {
  Checks c;
  const auto t0 = Clock::now();
  const double eta = memory::bandwidth_match(memory::SpectralModel{});
  const double dt = seconds_since(t0);
  c.add(within(eta, 0.7434, 0.0005), fmt("eta_bw %.6f (0.7434 +- 0.0005)", eta));
  c.add(dt < 1.0, fmt("runtime %.2e s (< 1 s)", dt));
  return c.done();
}

Outcome afc() {
  Checks c;
  const memory::CombParams comb;
  const double a = memory::afc_efficiency(comb, 500.0);
  const double b = memory::afc_efficiency(comb, 1000.0);
  c.add(within(a, 0.433, 0.010), fmt("eta(500 ns) %.4f (0.433 +- 0.010)", a));
  c.add(within(b, 0.310, 0.010), fmt("eta(1 us) %.4f (0.310 +- 0.010)", b));
  return c.done();
}

Outcome rates() {
  Checks c;
  const auto s = budget::rate_summary(budget::LinkTables{}, budget::Polarization::H);
  c.add(within_rel(s.r369_hz, 1352.0, 0.02), fmt("R_369 %.1f Hz", s.r369_hz));
  c.add(within_rel(s.eta_qfc, 0.00076, 0.05), fmt("eta_QFC %.4f%%", 100.0 * s.eta_qfc));
  c.add(within_rel(s.r580_hz, 1.8, 0.05), fmt("R_580 %.3f Hz", s.r580_hz));
  c.add(within_rel(s.r_ti_qm_hz, 0.2, 0.10), fmt("R_TI-QM %.4f Hz", s.r_ti_qm_hz));
  c.add(within_rel(s.eta_overall, 0.00011, 0.10), fmt("eta %.5f%%", 100.0 * s.eta_overall));
  return c.done();
}

Outcome ledger() {
  Checks c;
  const double total = budget::total_infidelity(budget::published_error_ledger(), budget::Composition::Sum);
  c.add(within(total, 0.106, 0.001), fmt("sum %.2f%% (10.6 +- 0.1)", 100.0 * total));
  const budget::ErrorModelInputs in;
  const double dphi = photon::jitter_phase_rms(in.jitter);
  c.add(within(dphi, 2.19e-2, 0.005e-2), fmt("dPhi %.3e rad", dphi));
  const auto model = budget::model_error_ledger(in);
  auto row = [&](const std::string& name) {
    for (const auto& s : model) {
      if (s.name == name) return s.infidelity;
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double jitter = row("Photon arrival-time jitter");
  c.add(within(jitter, 1.2e-4, 0.05e-4), fmt("jitter %.2e", jitter));
  const double pbs = row("Photon-state detection");
  c.add(within(pbs, 2.9e-4, 0.05e-4), fmt("PBS %.2e", pbs));
  const double dark = row("Dark noise");
  c.add(within(dark, 0.027, 0.001), fmt("dark noise %.3f%% at SNR 28 (2.7 +- 0.1)", 100.0 * dark));
  return c.done();
}

Outcome end_to_end() {
  Checks c;
  const auto cfg = defaults_for("ti_qm");
  const auto t0 = Clock::now();
  const auto rep = scenario::run(cfg);
  const double dt = seconds_since(t0);
  const double f = rep.fidelity->value;
  const double sd = rep.fidelity->stddev.value_or(0.0);
  c.add(std::abs(f - 0.892) <= 3.0 * sd,
        fmt("MLE F %.4f +- %.4f over %lld heralds (|F - 0.892| <= 3 sigma)", f, sd, *rep.heralds));
  const double fa = rep.analytic_fidelity->value;
  c.add(fa >= 0.88 && fa <= 0.91, fmt("analytic F %.5f in [0.88, 0.91]", fa));
  c.add(dt < 60.0, fmt("runtime %.2f s (< 60 s)", dt));
  return c.done();
}

Outcome chsh() {
  Checks c;
  const DensityMatrix bell = DensityMatrix::from_pure(bell_state(0.0));
  const double ideal = tomo::chsh(bell, tomo::ChshSettings::xz());
  c.add(within(ideal, 2.8284, 1e-4) && within(ideal, kTsirelson, 1e-6), fmt("ideal S %.7f", ideal));
  const auto cfg = defaults_for("ti_qm");
  const double fa = link::run_pipeline(scenario::pipeline_params(cfg, "ti_qm")).fidelity;
  const double werner = tomo::werner_equivalent_chsh(fa);
  c.add(werner >= 2.27 && werner <= 2.39, fmt("Werner S %.4f at F %.5f (in [2.27, 2.39])", werner, fa));
  CounterRng rng(9001);
  double worst = 0.0;
  for (int i = 0; i < testing::kPropertyCases; ++i) {
    const tomo::ChshSettings s{testing::random_pm1(rng), testing::random_pm1(rng), testing::random_pm1(rng),
                               testing::random_pm1(rng)};
    const DensityMatrix rho = testing::random_density(4, rng, 1 + i % 4);
    worst = std::max({worst, std::abs(tomo::chsh(rho, s)), tomo::max_chsh(rho)});
  }
  c.add(worst <= kTsirelson + 1e-9, fmt("max |S| %.9f over %d random states", worst, testing::kPropertyCases));
  return c.done();
}

Outcome tomography() {
  Checks c;
  CounterRng rng(9002);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const DensityMatrix rho = testing::random_density(4, rng);
    worst = std::max(worst, trace_distance(tomo::mle_reconstruct(tomo::exact_tomography(rho, 1e4)).rho, rho));
  }
  c.add(worst < 1e-6, fmt("exact counts: worst trace distance %.2e over 50 states", worst));
  std::vector<double> d;
  for (int i = 0; i < 50; ++i) {
    const DensityMatrix rho = testing::random_density(4, rng);
    const auto recs = tomo::simulate_tomography(rho, 9 * 10000, std::numeric_limits<double>::infinity(),
                                                rng.child(i));
    d.push_back(trace_distance(tomo::mle_reconstruct(recs).rho, rho));
  }
  std::sort(d.begin(), d.end());
  const double median = 0.5 * (d[24] + d[25]);
  c.add(median < 0.02, fmt("1e4 shots/setting: median trace distance %.4f", median));
  return c.done();
}

// Runs `body` over the property case count, returning the number of failures.
int count_failures(const std::function<bool(int)>& body) {
  int failures = 0;
  for (int i = 0; i < testing::kPropertyCases; ++i) failures += body(i) ? 0 : 1;
  return failures;
}

bool is_state(const CMatrix& m, double trace) {
  if (testing::max_abs(m - m.adjoint()) > 1e-10) return false;
  if (std::abs(m.trace().real() - trace) > 1e-10) return false;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  return es.eigenvalues().minCoeff() >= -1e-10;
}

double lorentz_band_oracle(const memory::SpectralModel& m) {
  const double g = m.gamma_natural_mhz / 2.0;
  const double a = -m.qm_bandwidth_mhz / 2.0 - m.detuning_mhz;
  const double b = m.qm_bandwidth_mhz / 2.0 - m.detuning_mhz;
  double sum = 0.0;
  for (double ctr : {m.zeeman_split_mhz / 2.0, -m.zeeman_split_mhz / 2.0}) {
    sum += std::atan((b - ctr) / g) - std::atan((a - ctr) / g);
  }
  return sum / (2.0 * kPi);
}

Outcome properties() {
  Checks c;
  std::uniform_real_distribution<double> u(0.0, 1.0);

  CounterRng r1(9101);
  const int channel_fail = count_failures([&](int i) {
    const int dim = i % 2 ? 4 : 2;
    const int nk = 1 + i % 3;
    const CMatrix v = testing::random_unitary(dim * nk, r1).leftCols(dim);
    std::vector<CMatrix> kraus;
    for (int k = 0; k < nk; ++k) kraus.push_back(v.middleRows(k * dim, dim));
    const QuantumChannel ch(kraus, true);
    const DensityMatrix rho = testing::random_density(dim, r1, 1 + i % dim);
    return is_state(apply_channel(rho, ch).matrix(), 1.0);
  });
  c.add(channel_fail == 0, fmt("CPTP/PSD/trace: %d failures", channel_fail));

  CounterRng r2(9102);
  const double b2 = memory::kCombShapeB * memory::kCombShapeB;
  const int afc_fail = count_failures([&](int) {
    memory::CombParams cp;
    cp.d = 1.0 + 20.0 * u(r2);
    cp.finesse = 2.0 + 10.0 * u(r2);
    cp.gamma_comb_khz = 10.0 + 500.0 * u(r2);
    const double t1 = 50.0 + 1000.0 * u(r2), t2 = t1 + 10.0 + 500.0 * u(r2);
    const double e1 = memory::afc_efficiency(cp, t1), e2 = memory::afc_efficiency(cp, t2);
    const double slope = (std::log(e2) - std::log(e1)) / ((t2 * t2 - t1 * t1) * 1e-18);
    const double expect = -2.0 * kPi * b2 * std::pow(cp.gamma_comb_khz * 1e3, 2);
    return e2 < e1 && std::abs(slope / expect - 1.0) < 1e-6;
  });
  c.add(afc_fail == 0, fmt("AFC decay/log-quadratic: %d failures", afc_fail));

  CounterRng r3(9103);
  const int bw_fail = count_failures([&](int) {
    memory::SpectralModel m;
    m.gamma_natural_mhz = 1.0 + 40.0 * u(r3);
    m.zeeman_split_mhz = 30.0 * u(r3);
    m.qm_bandwidth_mhz = 1.0 + 100.0 * u(r3);
    m.detuning_mhz = 120.0 * (u(r3) - 0.5);
    memory::SpectralModel neg = m;
    neg.detuning_mhz = -m.detuning_mhz;
    const double v = memory::bandwidth_match(m);
    return std::abs(v - lorentz_band_oracle(m)) < 1e-7 && std::abs(v - memory::bandwidth_match(neg)) < 1e-7;
  });
  c.add(bw_fail == 0, fmt("bandwidth symmetry/arctan oracle: %d failures", bw_fail));

  CounterRng r4(9104);
  const int herald_fail = count_failures([&](int) {
    const DensityMatrix rho = testing::random_density(4, r4);
    const double eh = u(r4), ev = u(r4);
    const double expect = eh * (rho(0, 0) + rho(2, 2)).real() + ev * (rho(1, 1) + rho(3, 3)).real();
    const DensityMatrix out = apply_channel(rho, memory::storage_channel(eh, ev));
    return std::abs(out.trace() - expect) < 1e-10 &&
           std::abs(memory::storage_herald_probability(rho, eh, ev) - expect) < 1e-10 &&
           is_state(out.matrix(), expect);
  });
  c.add(herald_fail == 0, fmt("storage herald identity: %d failures", herald_fail));
  c.add(true, fmt("%d cases each", testing::kPropertyCases));
  return c.done();
}

struct PublishedRegion {
  const char* label;
  std::vector<memory::Interval> pumped;
};

Outcome pump() {
  Checks c;
  const std::vector<PublishedRegion> published = {
      {"1/2g->1/2e", {{49.5, 272.7}}},
      {"1/2g->3/2e", {{0.0, 113.6}}},
      {"3/2g->1/2e", {{0.0, 75.1}, {125.9, 349.1}}},
      {"3/2g->3/2e", {{0.0, 190.0}}},
      {"5/2g->1/2e", {{0.0, 223.2}, {274.0, 497.2}}},
      {"5/2g->3/2e", {{0.0, 64.1}, {114.9, 338.1}}},
      {"5/2g->5/2e", {{0.0, 65.4}}},
  };
  const auto cfg = defaults_for("budget");
  const memory::PumpPlan plan = memory::plan_pump_regions(cfg.pump);
  int matched = 0;
  int intervals = 0;
  double worst = 0.0;
  for (const auto& p : published) {
    const auto& got = plan.find("IX", p.label).pumped;
    bool same = got.size() == p.pumped.size();
    for (size_t i = 0; same && i < got.size(); ++i) {
      const double e = std::max(std::abs(got[i].lo - p.pumped[i].lo), std::abs(got[i].hi - p.pumped[i].hi));
      worst = std::max(worst, e);
      same = e <= 0.1 + 1e-9;
    }
    matched += same;
    intervals += static_cast<int>(p.pumped.size());
  }
  c.add(matched == static_cast<int>(published.size()) && plan.transitions.size() == published.size(),
        fmt("%d/%zu published transition sets (%d intervals) match, worst endpoint error %.2f MHz; "
            "the published class IX list has seven sets",
            matched, published.size(), intervals, worst));
  const double d = memory::effective_depth(plan, cfg.native_d_h);
  c.add(within(d, 10.5, 0.5), fmt("d_eff(H) %.3f from native %.2f (10.5 +- 0.5)", d, cfg.native_d_h));
  return c.done();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Checks c;
  int files = 0;
  int differ = 0;
  for (const char* name : {"ti_qm", "chsh", "budget", "bandwidth_sweep"}) {
    const auto cfg = defaults_for(name);
    const auto a = scenario::emit_report(scenario::run(cfg), "json", testing::scratch_dir(std::string("acc_a_") + name));
    const auto b = scenario::emit_report(scenario::run(cfg), "json", testing::scratch_dir(std::string("acc_b_") + name));
    if (a.size() != b.size()) {
      ++differ;
      continue;
    }
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i].filename().string().find(".timing.") != std::string::npos) continue;
      ++files;
      differ += slurp(a[i]) != slurp(b[i]) || a[i].filename() != b[i].filename();
    }
  }
  c.add(differ == 0, fmt("%d report files compared, %d differ (timing files excluded)", files, differ));
  return c.done();
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"bandwidth matching", bandwidth},
      {"AFC efficiency", afc},
      {"rate chains", rates},
      {"infidelity ledger", ledger},
      {"end-to-end Monte Carlo", end_to_end},
      {"CHSH", chsh},
      {"tomography oracle equivalence", tomography},
      {"property suites", properties},
      {"pump planner regression", pump},
      {"determinism", determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
