// SPDX-License-Identifier: Apache-2.0
//
// teamprec: team MMSE precoding for cell-free massive MIMO
// Copyright (C) 2026 The teamprec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef TEAMPREC_RNG_HPP
#define TEAMPREC_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>

namespace teamprec {

/// Purpose tags keeping the random streams of different pipeline stages
/// disjoint. Two stages never share draws even with the same user seed.
enum class Stream : std::uint64_t {
  Geometry = 1,
  Statistics = 2,
  Evaluation = 3,
  ResidualExpectation = 4,
  Residual = 5,
  Tuning = 6,
  ObeMoments = 7,
  LsfdMoments = 8,
  Scenario = 9,
};

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Identifies one independent random stream: (seed, purpose, index, substream).
/// For channel draws the index is the draw number and the substream the TX.
struct StreamKey {
  std::uint64_t seed = 0;
  Stream stream = Stream::Evaluation;
  std::uint64_t index = 0;

  std::uint64_t hash(std::uint64_t substream = 0) const {
    std::uint64_t h = mix64(seed ^ 0x5eedULL);
    h = mix64(h ^ static_cast<std::uint64_t>(stream));
    h = mix64(h ^ index);
    return mix64(h ^ substream);
  }

  StreamKey with_index(std::uint64_t i) const { return {seed, stream, i}; }
};

/// Counter-based generator: the n-th output is a pure function of the key
/// hash and n, so streams can be generated in any order or in parallel.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key_hash) : base_(key_hash) {}
  CounterRng(const StreamKey& key, std::uint64_t substream) : base_(key.hash(substream)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return mix64(base_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Circularly-symmetric complex Gaussian samples drawn from a CounterRng.
class ComplexGaussian {
 public:
  explicit ComplexGaussian(CounterRng rng) : rng_(rng) {}

  /// Sample of CN(mean, variance).
  std::complex<double> operator()(double variance, std::complex<double> mean = {0.0, 0.0}) {
    const double s = std::sqrt(0.5 * variance);
    const double re = normal_(rng_);
    const double im = normal_(rng_);
    return mean + std::complex<double>(s * re, s * im);
  }

  CounterRng& rng() { return rng_; }

 private:
  CounterRng rng_;
  std::normal_distribution<double> normal_;
};

}  // namespace teamprec

#endif  // TEAMPREC_RNG_HPP
