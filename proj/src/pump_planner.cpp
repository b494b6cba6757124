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

#include "hetlink/pump_planner.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "hetlink/error.hpp"

namespace hetlink::memory {

namespace {

void check_interval(const Interval& iv, const char* what) {
  if (!(iv.lo < iv.hi)) {
    throw ParameterError(std::string("plan_pump_regions: ") + what + " must satisfy lo < hi");
  }
}

bool contains(const std::vector<Interval>& v, double x) {
  return std::any_of(v.begin(), v.end(), [x](const Interval& iv) { return x >= iv.lo && x <= iv.hi; });
}

// Status of each ground level of one class at ion coordinate x.
std::map<std::string, LevelStatus> level_status(const std::vector<TransitionPlan>& cls, double x) {
  std::map<std::string, std::pair<int, int>> tally;  // pumped, total
  for (const auto& tp : cls) {
    auto& t = tally[tp.transition.ground];
    ++t.second;
    if (contains(tp.pumped, x)) ++t.first;
  }
  std::map<std::string, LevelStatus> out;
  for (const auto& [g, t] : tally) {
    out[g] = t.first == 0 ? LevelStatus::None
             : t.first == t.second ? LevelStatus::Full
                                   : LevelStatus::Partial;
  }
  return out;
}

// Relative population of `ground` at x, if its line through x is unpumped.
double absorbing_weight(const std::map<std::string, LevelStatus>& status, const std::string& ground,
                        double partial_weight) {
  const double levels = static_cast<double>(status.size());
  int receivers = 0;
  for (const auto& [g, s] : status) {
    if (s != LevelStatus::Full) ++receivers;
  }
  double pop = 1.0 / levels;
  for (const auto& [g, s] : status) {
    if (g == ground) continue;
    const double donated = s == LevelStatus::Full      ? 1.0 / levels
                           : s == LevelStatus::Partial ? partial_weight / levels
                                                       : 0.0;
    pop += donated / receivers;
  }
  return pop * levels;
}

}  // namespace

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

double total_length(const std::vector<Interval>& v) {
  double s = 0.0;
  for (const auto& iv : v) s += iv.length();
  return s;
}

const TransitionPlan& PumpPlan::find(const std::string& class_name, const std::string& label) const {
  for (const auto& tp : transitions) {
    if (tp.class_name == class_name && tp.transition.label() == label) return tp;
  }
  throw ParameterError("PumpPlan::find: no transition " + class_name + " " + label);
}

PumpConfig default_pump_config() {
  PumpConfig c;
  c.classes.push_back({"IX",
                       {{"1/2g", "1/2e", 224.5},
                        {"1/2g", "3/2e", 383.6},
                        {"3/2g", "1/2e", 148.1},
                        {"3/2g", "3/2e", 307.2},
                        {"5/2g", "1/2e", 0.0},
                        {"5/2g", "3/2e", 159.1},
                        {"5/2g", "5/2e", 431.8}}});
  const double f0 = 248.6;
  const double chirp = 223.2;
  const double shift = 137.0;
  c.pump_windows = {{f0 - shift - chirp / 2, f0 - shift + chirp / 2},
                    {f0 + shift - chirp / 2, f0 + shift + chirp / 2}};
  c.target = {f0 - 24.1, f0 + 24.1};
  return c;
}

PumpPlan plan_pump_regions(const PumpConfig& cfg) {
  if (!(cfg.broadening_mhz > 0.0)) throw ParameterError("plan_pump_regions: broadening must be > 0");
  if (cfg.partial_weight < 0.0 || cfg.partial_weight > 1.0) {
    throw ParameterError("plan_pump_regions: partial weight outside [0, 1]");
  }
  check_interval(cfg.target, "target");
  for (const auto& w : cfg.pump_windows) {
    check_interval(w, "pump window");
    if (w.lo < cfg.target.hi && w.hi > cfg.target.lo) {
      throw ParameterError("plan_pump_regions: pump window overlaps the target band");
    }
  }

  PumpPlan plan;
  plan.pump_windows = merge_intervals(cfg.pump_windows);
  plan.target = cfg.target;
  const double width = cfg.broadening_mhz;

  double native = 0.0;
  double enhanced = 0.0;
  for (const auto& cls : cfg.classes) {
    std::vector<TransitionPlan> tps;
    for (const auto& t : cls.transitions) {
      if (!(t.strength >= 0.0)) throw ParameterError("plan_pump_regions: negative strength");
      TransitionPlan tp{cls.name, t, {}, {}};
      for (const auto& w : plan.pump_windows) {
        const double lo = std::max(0.0, w.lo - t.offset_mhz);
        const double hi = std::min(width, w.hi - t.offset_mhz);
        if (lo < hi) tp.pumped.push_back({lo, hi});
      }
      tp.pumped = merge_intervals(tp.pumped);
      tps.push_back(std::move(tp));
    }

    std::set<double> edges;
    for (const auto& tp : tps) {
      for (const auto& iv : tp.pumped) {
        edges.insert(iv.lo);
        edges.insert(iv.hi);
      }
    }
    edges.insert(0.0);
    edges.insert(width);

    for (auto& tp : tps) {
      const double o = tp.transition.offset_mhz;
      const double lo = std::max(cfg.target.lo, o);
      const double hi = std::min(cfg.target.hi, o + width);
      if (!(lo < hi)) continue;
      std::vector<double> cuts{lo, hi};
      for (double e : edges) {
        if (e + o > lo && e + o < hi) cuts.push_back(e + o);
      }
      std::sort(cuts.begin(), cuts.end());
      for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Interval band{cuts[i], cuts[i + 1]};
        if (band.length() <= 1e-9) continue;
        const double x = 0.5 * (band.lo + band.hi) - o;
        double w = 0.0;
        if (!contains(tp.pumped, x)) {
          w = absorbing_weight(level_status(tps, x), tp.transition.ground, cfg.partial_weight);
        }
        if (!tp.segments.empty() && tp.segments.back().weight == w &&
            tp.segments.back().band.hi == band.lo) {
          tp.segments.back().band.hi = band.hi;
        } else {
          tp.segments.push_back({band, w});
        }
        native += band.length() * tp.transition.strength;
        enhanced += band.length() * tp.transition.strength * w;
      }
    }
    for (auto& tp : tps) plan.transitions.push_back(std::move(tp));
  }
  if (cfg.pump_windows.empty()) {
    plan.enhancement = native > 0.0 ? 1.0 : 0.0;
  } else {
    plan.enhancement = native > 0.0 ? enhanced / native : 0.0;
  }
  return plan;
}

double effective_depth(const PumpPlan& plan, double native_d) {
  if (!(native_d >= 0.0)) throw ParameterError("effective_depth: native depth must be >= 0");
  return native_d * plan.enhancement;
}

void write_pump_csv(const PumpPlan& plan, std::ostream& os) {
  os << "transition,lo_MHz,hi_MHz,fraction\n";
  char buf[160];
  for (const auto& tp : plan.transitions) {
    const std::string name = tp.class_name + ":" + tp.transition.label();
    for (const auto& iv : tp.pumped) {
      std::snprintf(buf, sizeof buf, "%s,%.1f,%.1f,%.15g\n", name.c_str(), iv.lo, iv.hi, 0.0);
      os << buf;
    }
    for (const auto& s : tp.segments) {
      std::snprintf(buf, sizeof buf, "%s@target,%.1f,%.1f,%.15g\n", name.c_str(), s.band.lo, s.band.hi,
                    s.weight);
      os << buf;
    }
  }
}

PumpConfig pump_config_from_json(const nlohmann::json& j) {
  PumpConfig c = default_pump_config();
  auto interval = [](const nlohmann::json& a) { return Interval{a.at(0).get<double>(), a.at(1).get<double>()}; };
  if (j.contains("classes")) {
    c.classes.clear();
    for (const auto& jc : j.at("classes")) {
      IonClass cls{jc.at("name").get<std::string>(), {}};
      for (const auto& jt : jc.at("transitions")) {
        cls.transitions.push_back({jt.at("ground").get<std::string>(), jt.at("excited").get<std::string>(),
                                   jt.at("offset_mhz").get<double>(), jt.value("strength", 1.0)});
      }
      c.classes.push_back(std::move(cls));
    }
  }
  if (j.contains("pump_windows")) {
    c.pump_windows.clear();
    for (const auto& w : j.at("pump_windows")) c.pump_windows.push_back(interval(w));
  }
  if (j.contains("target")) c.target = interval(j.at("target"));
  c.broadening_mhz = j.value("broadening_mhz", c.broadening_mhz);
  c.partial_weight = j.value("partial_weight", c.partial_weight);
  return c;
}

}  // namespace hetlink::memory
