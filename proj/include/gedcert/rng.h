// Copyright 2026 The gedcert Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GEDCERT_RNG_H_
#define GEDCERT_RNG_H_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace gedcert {

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stateless generator: every draw is a pure function of (seed, keys). Noise
// keyed by matrix coordinates can therefore be permuted together with the
// data, which makes coupled sampling exact.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t Bits(std::initializer_list<std::uint64_t> keys) const {
    std::uint64_t h = SplitMix64(seed_);
    for (std::uint64_t k : keys) h = SplitMix64(h ^ k);
    return h;
  }

  // Uniform on the open interval (0, 1).
  double Uniform(std::initializer_list<std::uint64_t> keys) const {
    return (static_cast<double>(Bits(keys) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller on two derived uniforms.
  double Gaussian(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                  std::uint64_t d) const {
    const double u1 = Uniform({a, b, c, d, 0});
    const double u2 = Uniform({a, b, c, d, 1});
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// Sequential stream on top of CounterRng for generators that just need
// "the next number".
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed), stream_(stream) {}

  double Uniform() { return rng_.Uniform({stream_, counter_++}); }
  double Gaussian() { return rng_.Gaussian(stream_, counter_++, 0, 0); }
  bool Bernoulli(double p) { return Uniform() < p; }
  // Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n) {
    return static_cast<std::uint64_t>(Uniform() * static_cast<double>(n)) % n;
  }

 private:
  CounterRng rng_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace gedcert

#endif  // GEDCERT_RNG_H_
