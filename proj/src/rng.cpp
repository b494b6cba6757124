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

#include "hetlink/rng.hpp"

#include <algorithm>
#include <random>

#include "hetlink/error.hpp"

namespace hetlink {

std::vector<long long> sample_multinomial(long long trials, std::span<const double> probs,
                                          CounterRng& rng) {
  if (trials < 0) throw ParameterError("sample_multinomial: negative trial count");
  std::vector<long long> counts(probs.size(), 0);
  double remaining_mass = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw ParameterError("sample_multinomial: negative probability");
    remaining_mass += p;
  }
  long long remaining = trials;
  for (size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    const double cond = remaining_mass > 0.0 ? std::clamp(probs[i] / remaining_mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<long long> draw(remaining, cond);
    counts[i] = draw(rng);
    remaining -= counts[i];
    remaining_mass -= probs[i];
  }
  if (!probs.empty()) counts.back() += remaining;
  return counts;
}

}  // namespace hetlink
