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

#ifndef FAIRAUDIT_DATAMODEL_HPP_
#define FAIRAUDIT_DATAMODEL_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fairaudit/error.hpp"

namespace fairaudit {

inline constexpr int kMaxAttributes = 20;

// Identifies one cell of the 2^m lattice formed by m binary attributes.
//
// Encoding: attribute 0 is the least-significant bit of `index`, so
// bits()[j] == (index >> j) & 1.
class StratumId {
 public:
  StratumId(int m, std::uint32_t index) : m_(m), index_(index) {
    if (m < 1 || m > kMaxAttributes) {
      Fail(ErrorCategory::kConfiguration,
           "attribute count " + std::to_string(m) + " outside [1, " +
               std::to_string(kMaxAttributes) + "]");
    }
    if (index >= (std::uint32_t{1} << m)) {
      Fail(ErrorCategory::kConfiguration,
           "stratum index " + std::to_string(index) + " out of range for m=" +
               std::to_string(m));
    }
  }

  static StratumId FromBits(const std::vector<int>& bits) {
    std::uint32_t index = 0;
    for (std::size_t j = 0; j < bits.size(); ++j) {
      if (bits[j] != 0 && bits[j] != 1) {
        Fail(ErrorCategory::kContract, "stratum bits must be 0 or 1");
      }
      index |= static_cast<std::uint32_t>(bits[j]) << j;
    }
    return StratumId(static_cast<int>(bits.size()), index);
  }

  int m() const { return m_; }
  std::uint32_t index() const { return index_; }
  int bit(int attr) const { return static_cast<int>((index_ >> attr) & 1u); }

  std::vector<int> bits() const {
    std::vector<int> out(static_cast<std::size_t>(m_));
    for (int j = 0; j < m_; ++j) out[static_cast<std::size_t>(j)] = bit(j);
    return out;
  }

  friend bool operator==(const StratumId&, const StratumId&) = default;

 private:
  int m_;
  std::uint32_t index_;
};

inline void CheckAttributeCount(int m) {
  if (m < 1 || m > kMaxAttributes) {
    Fail(ErrorCategory::kConfiguration,
         "attribute count " + std::to_string(m) + " outside [1, " +
             std::to_string(kMaxAttributes) + "]");
  }
}

inline std::size_t NumStrata(int m) {
  CheckAttributeCount(m);
  return std::size_t{1} << m;
}

inline int StratumBit(std::size_t index, int attr) {
  return static_cast<int>((index >> attr) & 1u);
}

// All 2^m strata in index order.
inline std::vector<StratumId> EnumerateStrata(int m) {
  const std::size_t n = NumStrata(m);
  std::vector<StratumId> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.emplace_back(m, static_cast<std::uint32_t>(k));
  }
  return out;
}

// Strata whose bit `attr` equals `value`, in index order.
inline std::vector<StratumId> GroupStrata(int m, int attr, int value) {
  CheckAttributeCount(m);
  if (attr < 0 || attr >= m) {
    Fail(ErrorCategory::kConfiguration,
         "attribute " + std::to_string(attr) + " out of range for m=" +
             std::to_string(m));
  }
  if (value != 0 && value != 1) {
    Fail(ErrorCategory::kConfiguration, "group value must be 0 or 1");
  }
  std::vector<StratumId> out;
  out.reserve(std::size_t{1} << (m - 1));
  for (const StratumId& s : EnumerateStrata(m)) {
    if (s.bit(attr) == value) out.push_back(s);
  }
  return out;
}

struct BudgetSpec {
  std::int64_t per_agent_budget = 0;  // R
  int num_agents = 0;                 // m

  BudgetSpec() = default;
  BudgetSpec(std::int64_t r, int m) : per_agent_budget(r), num_agents(m) {
    if (r < 1) {
      Fail(ErrorCategory::kConfiguration, "per-agent budget must be positive");
    }
    if (m < 1) Fail(ErrorCategory::kConfiguration, "agent count must be positive");
  }

  std::int64_t total() const { return per_agent_budget * num_agents; }
};

// Which distribution over strata to use when conditioning on one attribute.
//  kEmpirical:   the observed joint frequencies p_k.
//  kIndependent: the product of attribute marginals (attributes independent).
enum class WeightMode { kEmpirical, kIndependent };

// Stratum-level population statistics and the derived ground truth.
struct GroundTruth {
  int m = 0;
  std::vector<double> stratum_prob;           // p_k
  std::vector<double> stratum_positive_rate;  // Y_k
  std::vector<std::int64_t> stratum_count;    // N_k (zeros for synthetic)
  std::vector<double> attr_marginal;          // P_i = P(X_i = 1)
  std::vector<double> true_dp;                // D_i

  std::size_t num_strata() const { return stratum_prob.size(); }

  // A stratum is empty when it carries no population mass.
  bool is_empty(std::size_t k) const { return !(stratum_prob[k] > 0.0); }

  double stratum_sigma(std::size_t k) const {
    const double y = stratum_positive_rate[k];
    return std::sqrt(y * (1.0 - y));
  }

  std::size_t num_nonempty() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < num_strata(); ++k) n += is_empty(k) ? 0 : 1;
    return n;
  }

  // Built from integer per-stratum tallies. D_i uses exact group sums.
  static GroundTruth FromCounts(int m, const std::vector<std::int64_t>& counts,
                                const std::vector<std::int64_t>& positives) {
    const std::size_t n_strata = NumStrata(m);
    if (counts.size() != n_strata || positives.size() != n_strata) {
      Fail(ErrorCategory::kContract, "stratum tally size mismatch");
    }
    const std::int64_t total =
        std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    if (total <= 0) Fail(ErrorCategory::kIngestion, "no rows");
    GroundTruth gt;
    gt.m = m;
    gt.stratum_count = counts;
    gt.stratum_prob.resize(n_strata);
    gt.stratum_positive_rate.resize(n_strata);
    for (std::size_t k = 0; k < n_strata; ++k) {
      if (positives[k] < 0 || positives[k] > counts[k]) {
        Fail(ErrorCategory::kContract, "positives exceed stratum count");
      }
      gt.stratum_prob[k] =
          static_cast<double>(counts[k]) / static_cast<double>(total);
      gt.stratum_positive_rate[k] =
          counts[k] > 0 ? static_cast<double>(positives[k]) /
                              static_cast<double>(counts[k])
                        : 0.0;
    }
    gt.attr_marginal.resize(static_cast<std::size_t>(m));
    gt.true_dp.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      std::int64_t n1 = 0, n0 = 0, y1 = 0, y0 = 0;
      for (std::size_t k = 0; k < n_strata; ++k) {
        if (StratumBit(k, i)) {
          n1 += counts[k];
          y1 += positives[k];
        } else {
          n0 += counts[k];
          y0 += positives[k];
        }
      }
      gt.attr_marginal[static_cast<std::size_t>(i)] =
          static_cast<double>(n1) / static_cast<double>(total);
      gt.true_dp[static_cast<std::size_t>(i)] =
          (n1 > 0 ? static_cast<double>(y1) / static_cast<double>(n1) : 0.0) -
          (n0 > 0 ? static_cast<double>(y0) / static_cast<double>(n0) : 0.0);
    }
    return gt;
  }

  // Built from stratum probabilities and rates (synthetic instances).
  static GroundTruth FromStrata(int m, std::vector<double> prob,
                                std::vector<double> rate) {
    const std::size_t n_strata = NumStrata(m);
    if (prob.size() != n_strata || rate.size() != n_strata) {
      Fail(ErrorCategory::kContract, "stratum vector size mismatch");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < n_strata; ++k) {
      if (!(prob[k] >= 0.0) || !(rate[k] >= 0.0 && rate[k] <= 1.0)) {
        Fail(ErrorCategory::kDomain, "stratum probability or rate out of range");
      }
      total += prob[k];
    }
    if (!(total > 0.0)) Fail(ErrorCategory::kDomain, "zero total probability");
    for (double& p : prob) p /= total;
    GroundTruth gt;
    gt.m = m;
    gt.stratum_prob = std::move(prob);
    gt.stratum_positive_rate = std::move(rate);
    gt.stratum_count.assign(n_strata, 0);
    gt.attr_marginal.resize(static_cast<std::size_t>(m));
    gt.true_dp.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      double p1 = 0.0, p0 = 0.0, y1 = 0.0, y0 = 0.0;
      for (std::size_t k = 0; k < n_strata; ++k) {
        const double p = gt.stratum_prob[k];
        if (StratumBit(k, i)) {
          p1 += p;
          y1 += p * gt.stratum_positive_rate[k];
        } else {
          p0 += p;
          y0 += p * gt.stratum_positive_rate[k];
        }
      }
      gt.attr_marginal[static_cast<std::size_t>(i)] = p1;
      gt.true_dp[static_cast<std::size_t>(i)] =
          (p1 > 0 ? y1 / p1 : 0.0) - (p0 > 0 ? y0 / p0 : 0.0);
    }
    return gt;
  }
};

// P(S_k | X_attr = value) for every stratum k (zero outside the group and on
// empty strata). Sums to one over the group.
inline std::vector<double> ConditionalWeights(const GroundTruth& gt, int attr,
                                              int value,
                                              WeightMode mode = WeightMode::kEmpirical) {
  if (attr < 0 || attr >= gt.m) {
    Fail(ErrorCategory::kConfiguration, "attribute index out of range");
  }
  const std::size_t n = gt.num_strata();
  std::vector<double> w(n, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (StratumBit(k, attr) != value || gt.is_empty(k)) continue;
    double weight = 1.0;
    if (mode == WeightMode::kEmpirical) {
      weight = gt.stratum_prob[k];
    } else {
      for (int j = 0; j < gt.m; ++j) {
        if (j == attr) continue;
        const double pj = gt.attr_marginal[static_cast<std::size_t>(j)];
        weight *= StratumBit(k, j) ? pj : 1.0 - pj;
      }
    }
    w[k] = weight;
    total += weight;
  }
  if (!(total > 0.0)) {
    Fail(ErrorCategory::kDomain, "group X_" + std::to_string(attr) + "=" +
                                     std::to_string(value) +
                                     " has zero probability");
  }
  for (double& x : w) x /= total;
  return w;
}

// P(Y = 1 | X_attr = value) under the given weighting.
inline double GroupRate(const GroundTruth& gt, int attr, int value,
                        WeightMode mode = WeightMode::kEmpirical) {
  const std::vector<double> w = ConditionalWeights(gt, attr, value, mode);
  double q = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) q += w[k] * gt.stratum_positive_rate[k];
  return q;
}

}  // namespace fairaudit

#endif  // FAIRAUDIT_DATAMODEL_HPP_
