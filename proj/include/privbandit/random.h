// Copyright 2026 The PrivBandit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVBANDIT_RANDOM_H_
#define PRIVBANDIT_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace privbandit {

// SplitMix64 finalizer.
uint64_t MixBits(uint64_t x);

// Derives the seed of a named substream ("environment", "noise", "attack",
// "clustering", ...) at a given index. Output files depend on these values, so
// the derivation must never change between releases.
uint64_t DeriveSeed(uint64_t base_seed, std::string_view stream,
                    uint64_t index = 0);

// Seeded random stream.
//
// Every sampler is written directly against the 64-bit Mersenne Twister so
// that results are identical across standard library implementations; the
// <random> distribution classes are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1), 53 random bits.
  double Uniform();
  // Uniform on (0, 1).
  double UniformOpen();
  // Uniform integer in [0, n); n > 0. Unbiased (Lemire's method).
  uint64_t UniformIndex(uint64_t n);

  // Standard normal via Box-Muller; consumes two uniforms per draw.
  double Normal();
  double Normal(double mean, double stddev) {
    return mean + stddev * Normal();
  }
  // Laplace(0, scale) by inverse CDF; variance is 2 * scale^2.
  double Laplace(double scale);
  // Exponential(1).
  double Exponential();

 private:
  std::mt19937_64 engine_;
};

}  // namespace privbandit

#endif  // PRIVBANDIT_RANDOM_H_
