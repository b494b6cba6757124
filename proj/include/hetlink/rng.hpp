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

#ifndef HETLINK_RNG_HPP
#define HETLINK_RNG_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace hetlink {

/// Counter-based generator: output n is a SplitMix64 finalizer applied to
/// (key, n). Streams are independent of call order, so a child stream derived
/// from (seed, index) yields the same numbers on any worker.
///
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Deterministic child stream for shard/resample `index`.
  CounterRng child(std::uint64_t index) const {
    return CounterRng(mix(key_ + 0x9e3779b97f4a7c15ULL * (index + 1)), Raw{});
  }

  result_type operator()() { return mix(key_ ^ (0xd1b54a32d192ed03ULL * ++counter_)); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  struct Raw {};
  CounterRng(std::uint64_t key, Raw) : key_(key) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Multinomial draw by sequential conditional binomials.
std::vector<long long> sample_multinomial(long long trials, std::span<const double> probs,
                                          CounterRng& rng);

}  // namespace hetlink

#endif  // HETLINK_RNG_HPP
