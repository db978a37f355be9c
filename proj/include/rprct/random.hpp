// Copyright 2026 The rprct Authors
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

#ifndef RPRCT_RANDOM_HPP_
#define RPRCT_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace rprct {

// A named, seedable random stream. Every sampling routine in the toolkit takes
// one of these explicitly; there is no global generator.
//
// Substreams are derived by hashing (key, label) so that a replicate's draws
// depend only on the root seed and its index, never on scheduling. The
// conversions from raw 64-bit words to doubles and bounded integers are done
// here rather than through <random> distributions so that output is
// identical across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  // Deterministic child stream; the parent is not advanced.
  RandomStream Substream(std::uint64_t index) const;
  RandomStream Substream(std::string_view label) const;

  std::uint64_t key() const { return key_; }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Uniform integer on [0, bound); bound must be positive.
  std::uint64_t UniformIndex(std::uint64_t bound);

  // Standard normal (Box-Muller, one value per call).
  double Normal();

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer, used for key derivation.
std::uint64_t MixBits(std::uint64_t x);

}  // namespace rprct

#endif  // RPRCT_RANDOM_HPP_
