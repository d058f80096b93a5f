// Copyright 2026 The qscore Authors
//
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

#pragma once

#include <cstdint>
#include <limits>

namespace qscore {

/// Counter-based 64-bit generator addressed by (seed, stream).
///
/// Output k of a stream is a SplitMix64 finalizer applied to
/// key(seed, stream) + (k + 1) * gamma(stream), so every value depends only on
/// (seed, stream, k). Distributions (uniform, normal) are implemented here
/// rather than taken from <random>, whose algorithms differ between standard
/// libraries.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller (one variate per two uniforms).
  double normal();

  /// Copy of this generator moved `steps` outputs ahead.
  [[nodiscard]] SeededRng advanced(std::uint64_t steps) const;
  /// Fresh generator on another stream of the same seed.
  [[nodiscard]] SeededRng substream(std::uint64_t stream) const { return SeededRng(seed_, stream); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t gamma_;
  std::uint64_t counter_ = 0;
};

}  // namespace qscore
