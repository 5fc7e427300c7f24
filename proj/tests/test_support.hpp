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

// Helpers shared by the test binaries: hand-rolled generators of random
// instances and small fixed populations.

#ifndef FAIRAUDIT_TESTS_TEST_SUPPORT_HPP_
#define FAIRAUDIT_TESTS_TEST_SUPPORT_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fairaudit.hpp"

namespace fairaudit::testing {

inline double Between(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.UniformDouble();
}

inline std::int64_t IntBetween(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng.UniformIndex(static_cast<std::uint64_t>(hi - lo + 1)));
}

// Independent attributes with marginals in [p_lo, p_hi] and stratum rates
// drawn uniformly in [y_lo, y_hi].
inline GroundTruth RandomIndependentGroundTruth(Rng& rng, int m, double p_lo = 0.1,
                                                double p_hi = 0.9, double y_lo = 0.05,
                                                double y_hi = 0.95) {
  std::vector<double> marg(static_cast<std::size_t>(m));
  for (double& p : marg) p = Between(rng, p_lo, p_hi);
  const std::size_t n = NumStrata(m);
  std::vector<double> prob(n), rate(n);
  for (std::size_t k = 0; k < n; ++k) {
    double p = 1.0;
    for (int j = 0; j < m; ++j) p *= StratumBit(k, j) ? marg[static_cast<std::size_t>(j)]
                                                      : 1.0 - marg[static_cast<std::size_t>(j)];
    prob[k] = p;
    rate[k] = Between(rng, y_lo, y_hi);
  }
  return GroundTruth::FromStrata(m, std::move(prob), std::move(rate));
}

// Arbitrary (correlated) stratum probabilities.
inline GroundTruth RandomGroundTruth(Rng& rng, int m) {
  const std::size_t n = NumStrata(m);
  std::vector<double> prob(n), rate(n);
  for (std::size_t k = 0; k < n; ++k) {
    prob[k] = Between(rng, 0.05, 1.0);
    rate[k] = Between(rng, 0.05, 0.95);
  }
  return GroundTruth::FromStrata(m, std::move(prob), std::move(rate));
}

inline GroundTruth FairGroundTruth(Rng& rng, int m) {
  GroundTruth base = RandomIndependentGroundTruth(rng, m);
  const double y = Between(rng, 0.05, 0.95);
  std::vector<double> rate(base.num_strata(), y);
  return GroundTruth::FromStrata(m, base.stratum_prob, std::move(rate));
}

// A population whose strata hold `rows` labels each, with the given
// fraction of positives; attributes are independent when the per-stratum
// row counts factorise.
inline Population MakePopulation(int m, const std::vector<std::int64_t>& rows,
                                 const std::vector<std::int64_t>& positives) {
  std::vector<std::vector<std::uint8_t>> labels(NumStrata(m));
  for (std::size_t k = 0; k < labels.size(); ++k) {
    for (std::int64_t r = 0; r < rows[k]; ++r) labels[k].push_back(r < positives[k] ? 1 : 0);
  }
  return Population::FromLabels(m, std::move(labels));
}

// Three independent attributes with marginals 0.5, 0.75 and 0.25 (row counts
// factorise), stratum rates between 0.2 and 0.9.
inline Population ToyPopulation() {
  const int m = 3;
  const std::int64_t f0[2] = {2, 2};
  const std::int64_t f1[2] = {1, 3};
  const std::int64_t f2[2] = {3, 1};
  const double rates[8] = {0.2, 0.5, 0.4, 0.8, 0.3, 0.6, 0.5, 0.9};
  std::vector<std::int64_t> rows(8), pos(8);
  for (std::size_t k = 0; k < 8; ++k) {
    rows[k] = 20 * f0[StratumBit(k, 0)] * f1[StratumBit(k, 1)] * f2[StratumBit(k, 2)];
    pos[k] = static_cast<std::int64_t>(std::llround(rates[k] * static_cast<double>(rows[k])));
  }
  return MakePopulation(m, rows, pos);
}

}  // namespace fairaudit::testing

#endif  // FAIRAUDIT_TESTS_TEST_SUPPORT_HPP_
