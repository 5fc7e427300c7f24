//
// Copyright 2026 The fairaudit Authors
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
//

#ifndef FAIRAUDIT_RANDOM_HPP_
#define FAIRAUDIT_RANDOM_HPP_

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fairaudit/error.hpp"

namespace fairaudit {

// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of repetition `rep`: splitmix64(base_seed XOR rep).
constexpr std::uint64_t RepetitionSeed(std::uint64_t base_seed, std::uint64_t rep) {
  return SplitMix64(base_seed ^ rep);
}

// Child stream of `seed` labelled by `tag` (e.g. a design or agent id).
constexpr std::uint64_t StreamSeed(std::uint64_t seed, std::uint64_t tag) {
  return SplitMix64(seed ^ SplitMix64(tag + 0x632be59bd9b4e019ULL));
}

// Seeded stream. Draws avoid the standard distributions so that sequences
// are identical across standard library implementations.
__extension__ using Uint128 = unsigned __int128;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, n), unbiased (Lemire's multiply-shift with rejection).
  std::uint64_t UniformIndex(std::uint64_t n) {
    if (n == 0) Fail(ErrorCategory::kContract, "UniformIndex(0)");
    Uint128 prod = static_cast<Uint128>(NextU64()) * n;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        prod = static_cast<Uint128>(NextU64()) * n;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::uint64_t>(prod >> 64);
  }

  // Uniform in [0, 1) with 53 random bits.
  double UniformDouble() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  bool Bernoulli(double p) { return UniformDouble() < p; }

 private:
  std::mt19937_64 engine_;
};

// Inverse-CDF sampler over a fixed discrete distribution.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> weights) {
    cumulative_.reserve(weights.size());
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) Fail(ErrorCategory::kContract, "negative sampling weight");
      total += w;
      cumulative_.push_back(total);
    }
    if (!(total > 0.0)) Fail(ErrorCategory::kContract, "all sampling weights zero");
    for (double& c : cumulative_) c /= total;
    // Zero-weight trailing entries must never be selected.
    last_positive_ = weights.size() - 1;
    while (last_positive_ > 0 && weights[last_positive_] == 0.0) --last_positive_;
    cumulative_[last_positive_] = 1.0;
  }

  std::size_t Sample(Rng& rng) const {
    const double u = rng.UniformDouble();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative_.begin()), last_positive_);
  }

  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
  std::size_t last_positive_ = 0;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_RANDOM_HPP_
