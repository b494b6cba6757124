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

// Spectral pump planning for an inhomogeneously broadened multi-class
// ensemble. Each transition spans [offset, offset + broadening] in absolute
// frequency; an ion is labelled by its position x in [0, broadening].

#ifndef HETLINK_PUMP_PLANNER_HPP
#define HETLINK_PUMP_PLANNER_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace hetlink::memory {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

/// Sorts and merges touching or overlapping intervals.
std::vector<Interval> merge_intervals(std::vector<Interval> v);
double total_length(const std::vector<Interval>& v);

struct Transition {
  std::string ground;   // e.g. "1/2g"
  std::string excited;  // e.g. "3/2e"
  double offset_mhz = 0.0;
  double strength = 1.0;  // relative oscillator strength

  std::string label() const { return ground + "->" + excited; }
};

struct IonClass {
  std::string name;
  std::vector<Transition> transitions;
};

struct PumpConfig {
  std::vector<IonClass> classes;
  std::vector<Interval> pump_windows;  // absolute MHz
  Interval target;                     // absolute MHz
  double broadening_mhz = 497.2;
  double partial_weight = 0.5;  // donation of a partly emptied ground level
};

enum class LevelStatus { None, Partial, Full };

struct AbsorbingSegment {
  Interval band;  // absolute MHz inside the target
  double weight;  // population relative to the unpumped ensemble
};

struct TransitionPlan {
  std::string class_name;
  Transition transition;
  std::vector<Interval> pumped;        // ion coordinate x, sorted and disjoint
  std::vector<AbsorbingSegment> segments;  // empty unless the line covers the target
};

struct PumpPlan {
  std::vector<TransitionPlan> transitions;
  std::vector<Interval> pump_windows;  // merged
  Interval target;
  double enhancement = 1.0;  // effective / native depth

  const TransitionPlan& find(const std::string& class_name, const std::string& label) const;
};

/// Class IX level offsets and the two-chirp pump sequence around f0 = 248.6 MHz.
PumpConfig default_pump_config();

/// Throws ParameterError on malformed intervals or a pump window reaching
/// into the target band.
PumpPlan plan_pump_regions(const PumpConfig& cfg);

/// native_d scaled by the plan's length- and strength-weighted population
/// enhancement over the target band.
double effective_depth(const PumpPlan& plan, double native_d);

/// Columns: transition, lo_MHz, hi_MHz, fraction. Pumped rows use the ion
/// coordinate and fraction 0; "@target" rows use absolute frequency and carry
/// the absorbing weight.
void write_pump_csv(const PumpPlan& plan, std::ostream& os);

PumpConfig pump_config_from_json(const nlohmann::json& j);

}  // namespace hetlink::memory

#endif  // HETLINK_PUMP_PLANNER_HPP
