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
#include <sstream>

#include "hetlink/pump_planner.hpp"
#include "hetlink/error.hpp"
#include "test_support.hpp"

namespace hetlink {
namespace {

using memory::Interval;
using memory::PumpConfig;
using memory::PumpPlan;
using testing::kPropertyCases;

struct Expected {
  const char* label;
  std::vector<Interval> pumped;
};

// Published pumped regions for class IX, ion coordinate in MHz.
const std::vector<Expected> kClassIx = {
    {"1/2g->1/2e", {{49.5, 272.7}}},
    {"1/2g->3/2e", {{0.0, 113.6}}},
    {"3/2g->1/2e", {{0.0, 75.1}, {125.9, 349.1}}},
    {"3/2g->3/2e", {{0.0, 190.0}}},
    {"5/2g->1/2e", {{0.0, 223.2}, {274.0, 497.2}}},
    {"5/2g->3/2e", {{0.0, 64.1}, {114.9, 338.1}}},
    {"5/2g->5/2e", {{0.0, 65.4}}},
};

void expect_regions(const PumpPlan& plan) {
  for (const auto& e : kClassIx) {
    SCOPED_TRACE(e.label);
    const auto& got = plan.find("IX", e.label).pumped;
    ASSERT_EQ(got.size(), e.pumped.size());
    for (size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i].lo, e.pumped[i].lo, 0.1);
      EXPECT_NEAR(got[i].hi, e.pumped[i].hi, 0.1);
    }
  }
}

TEST(PumpPlanTest, ClassIxRegionsMatchFixture) {
  const PumpPlan plan = memory::plan_pump_regions(memory::default_pump_config());
  EXPECT_EQ(plan.transitions.size(), kClassIx.size());
  expect_regions(plan);
  size_t sets = 0;
  for (const auto& tp : plan.transitions) sets += tp.pumped.size();
  EXPECT_EQ(sets, 10u);
}

TEST(PumpPlanTest, DefaultsFileMatchesBuiltIn) {
  const nlohmann::json d = testing::load_defaults();
  const PumpPlan plan = memory::plan_pump_regions(memory::pump_config_from_json(d.at("pump")));
  expect_regions(plan);
  const PumpPlan builtin = memory::plan_pump_regions(memory::default_pump_config());
  EXPECT_DOUBLE_EQ(plan.enhancement, builtin.enhancement);
}

TEST(PumpPlanTest, EffectiveDepthNearCombDepth) {
  const nlohmann::json d = testing::load_defaults();
  const PumpPlan plan = memory::plan_pump_regions(memory::default_pump_config());
  EXPECT_NEAR(memory::effective_depth(plan, d["pump"]["native_d_h"].get<double>()), 10.5, 0.5);
  EXPECT_GT(plan.enhancement, 1.0);
  EXPECT_THROW(memory::effective_depth(plan, -1.0), ParameterError);
}

TEST(PumpPlanTest, NoWindowsMeansNoPumping) {
  PumpConfig c = memory::default_pump_config();
  c.pump_windows.clear();
  const PumpPlan plan = memory::plan_pump_regions(c);
  for (const auto& tp : plan.transitions) {
    EXPECT_TRUE(tp.pumped.empty());
    for (const auto& s : tp.segments) EXPECT_DOUBLE_EQ(s.weight, 1.0);
  }
  EXPECT_DOUBLE_EQ(memory::effective_depth(plan, 5.24), 5.24);
}

TEST(PumpPlanTest, FullyEmptiedLevelDonatesEverything) {
  PumpConfig c;
  c.classes = {{"two", {{"a", "e", 0.0}, {"b", "e", 300.0}}}};
  c.broadening_mhz = 200.0;
  c.target = {50.0, 100.0};
  c.pump_windows = {{300.0, 500.0}};
  const PumpPlan plan = memory::plan_pump_regions(c);
  const auto& b = plan.find("two", "b->e");
  ASSERT_EQ(b.pumped.size(), 1u);
  EXPECT_EQ(b.pumped[0], (Interval{0.0, 200.0}));
  const auto& a = plan.find("two", "a->e");
  ASSERT_EQ(a.segments.size(), 1u);
  EXPECT_DOUBLE_EQ(a.segments[0].weight, 2.0);
  EXPECT_DOUBLE_EQ(plan.enhancement, 2.0);
}

TEST(PumpPlanTest, PartlyEmptiedLevelDonatesPartialWeight) {
  PumpConfig c;
  c.classes = {{"two", {{"a", "e", 0.0}, {"b", "e", 300.0}, {"b", "f", 1000.0}}}};
  c.broadening_mhz = 200.0;
  c.target = {50.0, 100.0};
  c.pump_windows = {{300.0, 500.0}};
  c.partial_weight = 0.5;
  const PumpPlan plan = memory::plan_pump_regions(c);
  EXPECT_DOUBLE_EQ(plan.enhancement, 1.25);
}

TEST(PumpPlanTest, RejectsBadInput) {
  PumpConfig c = memory::default_pump_config();
  c.pump_windows.push_back({240.0, 260.0});
  EXPECT_THROW(memory::plan_pump_regions(c), ParameterError);
  c = memory::default_pump_config();
  c.target = {10.0, 5.0};
  EXPECT_THROW(memory::plan_pump_regions(c), ParameterError);
  c = memory::default_pump_config();
  c.partial_weight = 1.5;
  EXPECT_THROW(memory::plan_pump_regions(c), ParameterError);
}

TEST(PumpPlanTest, CsvHasHeaderAndRows) {
  std::ostringstream os;
  memory::write_pump_csv(memory::plan_pump_regions(memory::default_pump_config()), os);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("transition,lo_MHz,hi_MHz,fraction\n", 0), 0u);
  EXPECT_NE(s.find("IX:5/2g->1/2e,274.0,497.2,0"), std::string::npos);
}

TEST(IntervalTest, Merge) {
  const auto m = memory::merge_intervals({{3, 4}, {0, 1}, {1, 2}, {3.5, 5}});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0], (Interval{0, 2}));
  EXPECT_EQ(m[1], (Interval{3, 5}));
  EXPECT_DOUBLE_EQ(memory::total_length(m), 4.0);
}

// ---------------------------------------------------------------------------

PumpConfig random_config(CounterRng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PumpConfig c;
  c.broadening_mhz = 100.0 + 400.0 * u(rng);
  c.partial_weight = u(rng);
  const double t0 = 200.0 + 200.0 * u(rng);
  c.target = {t0, t0 + 10.0 + 50.0 * u(rng)};
  const char* grounds[] = {"g1", "g2", "g3"};
  memory::IonClass cls{"C", {}};
  const int n = 2 + static_cast<int>(u(rng) * 5);
  for (int k = 0; k < n; ++k) {
    cls.transitions.push_back({grounds[k % 3], "e" + std::to_string(k), 500.0 * u(rng), 0.2 + u(rng)});
  }
  c.classes = {cls};
  const int w = static_cast<int>(u(rng) * 4);
  for (int k = 0; k < w; ++k) {
    // Either below or above the target.
    if (u(rng) < 0.5) {
      const double hi = c.target.lo * u(rng);
      c.pump_windows.push_back({hi * u(rng), hi + 1e-3});
    } else {
      const double lo = c.target.hi + 300.0 * u(rng);
      c.pump_windows.push_back({lo, lo + 1.0 + 300.0 * u(rng)});
    }
  }
  return c;
}

TEST(PumpProperty, InvariantUnderReordering) {
  CounterRng rng(501);
  for (int i = 0; i < kPropertyCases; ++i) {
    const PumpConfig c = random_config(rng);
    PumpConfig r = c;
    std::reverse(r.classes[0].transitions.begin(), r.classes[0].transitions.end());
    std::reverse(r.pump_windows.begin(), r.pump_windows.end());
    const PumpPlan a = memory::plan_pump_regions(c);
    const PumpPlan b = memory::plan_pump_regions(r);
    ASSERT_NEAR(a.enhancement, b.enhancement, 1e-12);
    for (const auto& tp : a.transitions) {
      const auto& other = b.find(tp.class_name, tp.transition.label());
      ASSERT_EQ(tp.pumped, other.pumped);
    }
  }
}

TEST(PumpProperty, RegionsAreDisjointAndBounded) {
  CounterRng rng(502);
  for (int i = 0; i < kPropertyCases; ++i) {
    const PumpConfig c = random_config(rng);
    const PumpPlan plan = memory::plan_pump_regions(c);
    for (const auto& tp : plan.transitions) {
      for (size_t k = 0; k < tp.pumped.size(); ++k) {
        ASSERT_LT(tp.pumped[k].lo, tp.pumped[k].hi);
        ASSERT_GE(tp.pumped[k].lo, 0.0);
        ASSERT_LE(tp.pumped[k].hi, c.broadening_mhz);
        if (k > 0) {
          ASSERT_GT(tp.pumped[k].lo, tp.pumped[k - 1].hi);
        }
      }
      for (const auto& s : tp.segments) {
        ASSERT_GE(s.band.lo, c.target.lo - 1e-12);
        ASSERT_LE(s.band.hi, c.target.hi + 1e-12);
        ASSERT_GE(s.weight, 0.0);
        ASSERT_LE(s.weight, 3.0 + 1e-12);
      }
    }
    ASSERT_GE(plan.enhancement, 0.0);
  }
}

}  // namespace
}  // namespace hetlink
