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

#ifndef FAIRAUDIT_ALLOCATION_HPP_
#define FAIRAUDIT_ALLOCATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/csv.hpp"
#include "fairaudit/datamodel.hpp"
#include "fairaudit/dataset.hpp"
#include "fairaudit/error.hpp"

namespace fairaudit {

enum class SamplingMethod { kUniform, kStratified, kNeyman };
enum class CollabStrategy { kNoCollab, kAPosteriori, kAPriori };

inline constexpr SamplingMethod kAllMethods[] = {
    SamplingMethod::kUniform, SamplingMethod::kStratified, SamplingMethod::kNeyman};
inline constexpr CollabStrategy kAllStrategies[] = {
    CollabStrategy::kNoCollab, CollabStrategy::kAPosteriori, CollabStrategy::kAPriori};

inline std::string MethodName(SamplingMethod m) {
  switch (m) {
    case SamplingMethod::kUniform: return "uniform";
    case SamplingMethod::kStratified: return "stratified";
    case SamplingMethod::kNeyman: return "neyman";
  }
  return "?";
}

inline std::string StrategyName(CollabStrategy s) {
  switch (s) {
    case CollabStrategy::kNoCollab: return "none";
    case CollabStrategy::kAPosteriori: return "aposteriori";
    case CollabStrategy::kAPriori: return "apriori";
  }
  return "?";
}

inline SamplingMethod ParseMethod(const std::string& s) {
  for (SamplingMethod m : kAllMethods) {
    if (MethodName(m) == s) return m;
  }
  Fail(ErrorCategory::kConfiguration, "unknown sampling method '" + s + "'");
}

inline CollabStrategy ParseStrategy(const std::string& s) {
  if (s == "nocollab" || s == "no-collab") return CollabStrategy::kNoCollab;
  if (s == "a-posteriori") return CollabStrategy::kAPosteriori;
  if (s == "a-priori") return CollabStrategy::kAPriori;
  for (CollabStrategy c : kAllStrategies) {
    if (StrategyName(c) == s) return c;
  }
  Fail(ErrorCategory::kConfiguration, "unknown collaboration strategy '" + s + "'");
}

// Largest-remainder rounding of `real_counts` to integers summing to `total`.
// Ties go to the lowest index.
inline std::vector<std::int64_t> RoundAllocation(std::span<const double> real_counts,
                                                 std::int64_t total) {
  double sum = 0.0;
  for (double v : real_counts) {
    if (!(v >= 0.0)) {
      Fail(ErrorCategory::kContract, "negative or NaN entry in allocation");
    }
    sum += v;
  }
  if (std::abs(sum - static_cast<double>(total)) > 1e-6 * std::max(1.0, sum)) {
    Fail(ErrorCategory::kContract, "allocation sums to " + FormatDouble(sum) +
                                       ", expected " + std::to_string(total));
  }
  const std::size_t n = real_counts.size();
  std::vector<std::int64_t> out(n);
  std::vector<double> remainder(n);
  std::int64_t assigned = 0;
  for (std::size_t k = 0; k < n; ++k) {
    // Snap values within rounding noise of an integer.
    const double nearest = std::round(real_counts[k]);
    const double v = std::abs(real_counts[k] - nearest) < 1e-9 ? nearest : real_counts[k];
    out[k] = static_cast<std::int64_t>(std::floor(v));
    remainder[k] = v - static_cast<double>(out[k]);
    assigned += out[k];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  std::int64_t left = total - assigned;
  for (std::size_t idx = 0; left > 0 && idx < n; ++idx, --left) ++out[order[idx]];
  if (left != 0) Fail(ErrorCategory::kContract, "rounding could not reach the total");
  return out;
}

// Two-group split of R queries minimising sigma1/sqrt(R1) + sigma0/sqrt(R0).
struct TwoGroupSplit {
  std::int64_t n1 = 0;
  std::int64_t n0 = 0;
  bool degenerate = false;  // both sigmas zero; split evenly
};

// Continuous minimiser R * s1^(2/3) / (s1^(2/3) + s0^(2/3)), clamped so that
// both groups keep at least one query.
inline double NeymanTwoGroupContinuous(double sigma1, double sigma0, double budget) {
  if (!(sigma1 >= 0.0) || !(sigma0 >= 0.0)) {
    Fail(ErrorCategory::kDomain, "standard deviations must be nonnegative");
  }
  if (!(budget >= 2.0)) Fail(ErrorCategory::kDomain, "two-group split needs R >= 2");
  if (sigma1 == 0.0 && sigma0 == 0.0) return budget / 2.0;
  const double a = std::cbrt(sigma1 * sigma1);
  const double b = std::cbrt(sigma0 * sigma0);
  return std::clamp(budget * a / (a + b), 1.0, budget - 1.0);
}

inline double TwoGroupError(double sigma1, double sigma0, double n1, double n0) {
  return sigma1 / std::sqrt(n1) + sigma0 / std::sqrt(n0);
}

inline TwoGroupSplit NeymanTwoGroup(double sigma1, double sigma0, std::int64_t budget) {
  if (budget < 2) Fail(ErrorCategory::kDomain, "two-group split needs R >= 2");
  const auto r = static_cast<double>(budget);
  if (sigma1 == 0.0 && sigma0 == 0.0) {
    if (!(sigma1 >= 0.0) || !(sigma0 >= 0.0)) {
      Fail(ErrorCategory::kDomain, "standard deviations must be nonnegative");
    }
    return {budget / 2, budget - budget / 2, true};
  }
  const double x = NeymanTwoGroupContinuous(sigma1, sigma0, r);
  const auto lo = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(x)), 1, budget - 1);
  const auto hi = std::clamp<std::int64_t>(lo + 1, 1, budget - 1);
  const double f_lo = TwoGroupError(sigma1, sigma0, static_cast<double>(lo), r - static_cast<double>(lo));
  const double f_hi = TwoGroupError(sigma1, sigma0, static_cast<double>(hi), r - static_cast<double>(hi));
  const std::int64_t n1 = f_hi < f_lo ? hi : lo;
  return {n1, budget - n1, false};
}

// Average over agents of the stratified-estimator standard error
//   eps(i) = sqrt(sum_{k: X_i=1} w1_k^2 s_k^2 / R_k) + sqrt(sum_{k: X_i=0} w0_k^2 s_k^2 / R_k)
// where w_k are conditional stratum weights and s_k stratum deviations.
class JointObjective {
 public:
  JointObjective(const GroundTruth& gt, WeightMode weights = WeightMode::kEmpirical)
      : m_(gt.m), strata_(gt.num_strata()) {
    for (std::size_t k = 0; k < strata_; ++k) {
      if (!gt.is_empty(k)) active_.push_back(k);
    }
    for (int i = 0; i < m_; ++i) {
      for (int v : {1, 0}) {
        const std::vector<double> w = ConditionalWeights(gt, i, v, weights);
        Row row;
        for (std::size_t k : active_) {
          const double s = gt.stratum_sigma(k);
          const double a = w[k] * w[k] * s * s;
          if (a > 0.0) row.push_back({k, a});
        }
        rows_.push_back(std::move(row));
      }
    }
  }

  int m() const { return m_; }
  std::size_t num_strata() const { return strata_; }
  const std::vector<std::size_t>& active_strata() const { return active_; }

  // Per-agent errors eps(i) at allocation x (indexed by stratum).
  std::vector<double> AgentErrors(std::span<const double> x) const {
    std::vector<double> out(static_cast<std::size_t>(m_), 0.0);
    for (std::size_t g = 0; g < rows_.size(); ++g) {
      out[g / 2] += std::sqrt(RowSum(g, x));
    }
    return out;
  }

  // Per-group terms, ordered (agent 0 group 1, agent 0 group 0, agent 1 ...).
  std::vector<double> GroupErrors(std::span<const double> x) const {
    std::vector<double> out(rows_.size());
    for (std::size_t g = 0; g < rows_.size(); ++g) out[g] = std::sqrt(RowSum(g, x));
    return out;
  }

  double Value(std::span<const double> x) const {
    double total = 0.0;
    for (std::size_t g = 0; g < rows_.size(); ++g) total += std::sqrt(RowSum(g, x));
    return total / m_;
  }

  // c_k such that dValue/dx_k = -c_k / x_k^2.
  std::vector<double> Pressure(std::span<const double> x) const {
    std::vector<double> c(strata_, 0.0);
    for (std::size_t g = 0; g < rows_.size(); ++g) {
      const double sum = RowSum(g, x);
      if (!(sum > 0.0)) continue;
      const double scale = 1.0 / (2.0 * std::sqrt(sum) * m_);
      for (const auto& [k, a] : rows_[g]) c[k] += a * scale;
    }
    return c;
  }

  // Objective change when one query moves from stratum `from` to `to`.
  double MoveDelta(std::span<const double> x, std::span<const double> row_sums,
                   std::size_t from, std::size_t to) const {
    double delta = 0.0;
    for (std::size_t g = 0; g < rows_.size(); ++g) {
      double s = row_sums[g];
      const double before = std::sqrt(s);
      for (const auto& [k, a] : rows_[g]) {
        if (k == from) s += a * (1.0 / (x[k] - 1.0) - 1.0 / x[k]);
        if (k == to) s += a * (1.0 / (x[k] + 1.0) - 1.0 / x[k]);
      }
      delta += std::sqrt(std::max(0.0, s)) - before;
    }
    return delta / m_;
  }

  std::vector<double> RowSums(std::span<const double> x) const {
    std::vector<double> out(rows_.size());
    for (std::size_t g = 0; g < rows_.size(); ++g) out[g] = RowSum(g, x);
    return out;
  }

 private:
  using Row = std::vector<std::pair<std::size_t, double>>;

  double RowSum(std::size_t g, std::span<const double> x) const {
    double s = 0.0;
    for (const auto& [k, a] : rows_[g]) s += a / x[k];
    return s;
  }

  int m_;
  std::size_t strata_;
  std::vector<std::size_t> active_;
  std::vector<Row> rows_;
};

struct JointOptions {
  WeightMode weights = WeightMode::kEmpirical;
  double lower_bound = 1.0;  // minimum queries per non-empty stratum
  double tolerance = 1e-9;   // relative KKT stationarity residual
  int max_fixed_point_iterations = 1000;
  int max_gradient_iterations = 100000;
};

struct JointResult {
  std::vector<double> allocation;  // per stratum; zero on empty strata
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool used_gradient_fallback = false;
};

namespace internal {

// x_k = max(lo, sqrt(c_k) / s) over `active`, with s chosen so sum x = total.
inline void WaterFill(std::span<const double> c, const std::vector<std::size_t>& active,
                      double lo, double total, std::vector<double>& x) {
  const std::size_t n = active.size();
  std::vector<double> root(n);
  double root_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    root[j] = std::sqrt(std::max(0.0, c[active[j]]));
    root_sum += root[j];
  }
  if (!(root_sum > 0.0)) {
    for (std::size_t k : active) x[k] = total / static_cast<double>(n);
    return;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return root[a] > root[b]; });
  double prefix = 0.0;
  double scale = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    prefix += root[order[j - 1]];
    const double room = total - static_cast<double>(n - j) * lo;
    if (!(room > 0.0)) continue;
    const double s = prefix / room;
    const bool top_ok = root[order[j - 1]] / s >= lo;
    const bool next_ok = j == n || root[order[j]] / s <= lo;
    if (top_ok && next_ok) {
      scale = s;
      break;
    }
  }
  if (!(scale > 0.0)) {
    for (std::size_t k : active) x[k] = total / static_cast<double>(n);
    return;
  }
  for (std::size_t j = 0; j < n; ++j) {
    x[active[j]] = std::max(lo, root[j] / scale);
  }
}

// Euclidean projection of v (over `active`) onto {x >= lo, sum x = total}.
inline void ProjectShiftedSimplex(std::vector<double>& v, const std::vector<std::size_t>& active,
                                  double lo, double total) {
  const std::size_t n = active.size();
  const double radius = total - lo * static_cast<double>(n);
  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = v[active[j]] - lo;
  std::vector<double> sorted = u;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cumulative += sorted[j];
    const double t = (cumulative - radius) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) theta = t;
  }
  for (std::size_t j = 0; j < n; ++j) v[active[j]] = std::max(u[j] - theta, 0.0) + lo;
}

}  // namespace internal

// Relative KKT residual of x for min Value(x) s.t. sum x = total, x >= lo.
inline double KktResidual(const JointObjective& f, std::span<const double> x, double lo) {
  const std::vector<double> c = f.Pressure(x);
  std::vector<double> interior;
  for (std::size_t k : f.active_strata()) {
    if (x[k] > lo * (1.0 + 1e-12)) interior.push_back(c[k] / (x[k] * x[k]));
  }
  if (interior.empty()) return 0.0;
  std::vector<double> sorted = interior;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double lambda = sorted[sorted.size() / 2];
  if (!(lambda > 0.0)) return 0.0;
  double worst = 0.0;
  for (double mu : interior) worst = std::max(worst, std::abs(mu - lambda));
  for (std::size_t k : f.active_strata()) {
    if (x[k] <= lo * (1.0 + 1e-12)) {
      worst = std::max(worst, c[k] / (x[k] * x[k]) - lambda);
    }
  }
  return worst / lambda;
}

// Real-valued allocation of the pooled budget m*R over the 2^m strata that
// minimises the average stratified-estimator error across agents.
//
// Solved by the stationarity fixed point x_k = max(lo, sqrt(c_k(x) / lambda)),
// with projected gradient descent (backtracking) as the fallback. The
// objective is convex, so a KKT point is the global minimum.
inline JointResult NeymanJoint(const GroundTruth& gt, const BudgetSpec& budget,
                               const JointOptions& options = {}) {
  if (gt.m != budget.num_agents) {
    Fail(ErrorCategory::kAllocation, "ground truth has " + std::to_string(gt.m) +
                                         " attributes but budget has " +
                                         std::to_string(budget.num_agents) + " agents");
  }
  const JointObjective f(gt, options.weights);
  const auto& active = f.active_strata();
  const double total = static_cast<double>(budget.total());
  const double lo = options.lower_bound;
  if (total < lo * static_cast<double>(active.size())) {
    Fail(ErrorCategory::kAllocation,
         "pooled budget " + std::to_string(budget.total()) + " cannot cover " +
             std::to_string(active.size()) + " non-empty strata");
  }
  JointResult result;
  std::vector<double> x(f.num_strata(), 0.0);
  for (std::size_t k : active) x[k] = total / static_cast<double>(active.size());

  double residual = KktResidual(f, x, lo);
  int it = 0;
  for (; it < options.max_fixed_point_iterations && residual >= options.tolerance; ++it) {
    internal::WaterFill(f.Pressure(x), active, lo, total, x);
    residual = KktResidual(f, x, lo);
  }
  result.iterations = it;
  if (residual >= options.tolerance) {
    result.used_gradient_fallback = true;
    double value = f.Value(x);
    double step = 1.0;
    for (int g = 0; g < options.max_gradient_iterations && residual >= options.tolerance; ++g) {
      const std::vector<double> c = f.Pressure(x);
      std::vector<double> grad(x.size(), 0.0);
      for (std::size_t k : active) grad[k] = -c[k] / (x[k] * x[k]);
      for (;;) {
        std::vector<double> trial = x;
        for (std::size_t k : active) trial[k] -= step * grad[k];
        internal::ProjectShiftedSimplex(trial, active, lo, total);
        double linear = 0.0, quad = 0.0;
        for (std::size_t k : active) {
          const double d = trial[k] - x[k];
          linear += grad[k] * d;
          quad += d * d;
        }
        const double trial_value = f.Value(trial);
        if (trial_value <= value + linear + quad / (2.0 * step) || step < 1e-300) {
          x = std::move(trial);
          value = trial_value;
          break;
        }
        step *= 0.5;
      }
      step *= 1.5;
      residual = KktResidual(f, x, lo);
      ++result.iterations;
    }
  }
  if (residual >= options.tolerance) {
    Fail(ErrorCategory::kOptimizer, "joint allocation did not converge: KKT residual " +
                                        FormatDouble(residual) + " after " +
                                        std::to_string(result.iterations) + " iterations");
  }
  result.objective = f.Value(x);
  result.kkt_residual = residual;
  result.allocation = std::move(x);
  return result;
}

// Integer version: largest-remainder rounding of the continuous optimum,
// then single-query moves between strata while they lower the objective.
inline std::vector<std::int64_t> NeymanJointInteger(const GroundTruth& gt,
                                                    const BudgetSpec& budget,
                                                    const JointOptions& options = {}) {
  const JointResult real = NeymanJoint(gt, budget, options);
  std::vector<std::int64_t> counts = RoundAllocation(real.allocation, budget.total());
  const JointObjective f(gt, options.weights);
  const auto& active = f.active_strata();
  if (active.size() > 1024) return counts;
  const auto lo = static_cast<std::int64_t>(std::ceil(options.lower_bound));
  std::vector<double> x(counts.begin(), counts.end());
  for (std::size_t guard = 0; guard < 100 * active.size(); ++guard) {
    const std::vector<double> sums = f.RowSums(x);
    double best = -1e-15;
    std::size_t best_from = 0, best_to = 0;
    for (std::size_t from : active) {
      if (counts[from] <= lo) continue;
      for (std::size_t to : active) {
        if (to == from) continue;
        const double d = f.MoveDelta(x, sums, from, to);
        if (d < best) {
          best = d;
          best_from = from;
          best_to = to;
        }
      }
    }
    if (best >= -1e-15) break;
    --counts[best_from];
    ++counts[best_to];
    x[best_from] -= 1.0;
    x[best_to] += 1.0;
  }
  return counts;
}

// One block of an agent's queries: `quota` queries either pinned to one
// stratum or drawn i.i.d. from a distribution over strata.
struct QueryCell {
  std::int64_t quota = 0;
  std::optional<std::size_t> stratum;
  std::shared_ptr<const std::vector<double>> weights;

  double ProbabilityOf(std::size_t k) const {
    if (stratum) return *stratum == k ? 1.0 : 0.0;
    return (*weights)[k];
  }
};

struct AgentDesign {
  std::vector<QueryCell> cells;

  std::int64_t total() const {
    std::int64_t t = 0;
    for (const QueryCell& c : cells) t += c.quota;
    return t;
  }
};

struct AllocationOptions {
  // Distribution of the attributes an agent does not control.
  WeightMode fill = WeightMode::kEmpirical;
  JointOptions joint;
};

// Integer query counts per agent and stratum for one (method, strategy) pair.
// `counts` is exact for pinned cells and the largest-remainder expansion of
// the expected counts for randomly filled cells.
struct AllocationPlan {
  SamplingMethod method = SamplingMethod::kUniform;
  CollabStrategy strategy = CollabStrategy::kNoCollab;
  BudgetSpec budget;
  int m = 0;
  std::vector<std::vector<std::int64_t>> counts;  // [agent][stratum]
  std::vector<AgentDesign> designs;               // [agent]

  bool pooled() const { return strategy != CollabStrategy::kNoCollab; }

  // Expected (R_i, R_i_bar) available to agent i's estimator on its own
  // attribute: own queries without collaboration, everyone's otherwise.
  std::pair<double, double> ExpectedGroupCounts(int agent) const {
    double n1 = 0.0, n0 = 0.0;
    for (int a = 0; a < m; ++a) {
      if (!pooled() && a != agent) continue;
      for (const QueryCell& cell : designs[static_cast<std::size_t>(a)].cells) {
        double p1 = 0.0;
        const std::size_t strata = counts[0].size();
        for (std::size_t k = 0; k < strata; ++k) {
          if (StratumBit(k, agent)) p1 += cell.ProbabilityOf(k);
        }
        n1 += static_cast<double>(cell.quota) * p1;
        n0 += static_cast<double>(cell.quota) * (1.0 - p1);
      }
    }
    return {n1, n0};
  }

  void WriteCsv(std::ostream& out) const {
    out << "agent,stratum_index,count\n";
    for (std::size_t a = 0; a < counts.size(); ++a) {
      for (std::size_t k = 0; k < counts[a].size(); ++k) {
        out << a << ',' << k << ',' << counts[a][k] << '\n';
      }
    }
  }
};

namespace internal {

inline std::vector<double> FillWeights(const GroundTruth& gt, int attr, int value,
                                       WeightMode mode) {
  try {
    return ConditionalWeights(gt, attr, value, mode);
  } catch (const Error& e) {
    Fail(ErrorCategory::kAllocation, "attribute " + std::to_string(attr) + " group " +
                                         std::to_string(value) + ": " + e.what());
  }
}

// Weights of an unrestricted draw over all strata.
inline std::vector<double> PopulationWeights(const GroundTruth& gt, WeightMode mode) {
  std::vector<double> w(gt.num_strata(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (gt.is_empty(k)) continue;
    double p = gt.stratum_prob[k];
    if (mode == WeightMode::kIndependent) {
      p = 1.0;
      for (int j = 0; j < gt.m; ++j) {
        const double pj = gt.attr_marginal[static_cast<std::size_t>(j)];
        p *= StratumBit(k, j) ? pj : 1.0 - pj;
      }
    }
    w[k] = p;
    total += p;
  }
  for (double& x : w) x /= total;
  return w;
}

// Expected-count expansion of a cell, rounded within the cell.
inline void ExpandCell(const QueryCell& cell, std::vector<std::int64_t>& row) {
  if (cell.stratum) {
    row[*cell.stratum] += cell.quota;
    return;
  }
  std::vector<double> expected(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) {
    expected[k] = static_cast<double>(cell.quota) * (*cell.weights)[k];
  }
  const auto rounded = RoundAllocation(expected, cell.quota);
  for (std::size_t k = 0; k < row.size(); ++k) row[k] += rounded[k];
}

// Splits pooled per-stratum counts into m agent designs of R queries each,
// walking strata in index order.
inline std::vector<AgentDesign> SplitPooled(const std::vector<std::int64_t>& pooled,
                                            const BudgetSpec& budget) {
  std::vector<AgentDesign> designs(static_cast<std::size_t>(budget.num_agents));
  std::size_t agent = 0;
  std::int64_t room = budget.per_agent_budget;
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    std::int64_t left = pooled[k];
    while (left > 0) {
      const std::int64_t take = std::min(left, room);
      designs[agent].cells.push_back(QueryCell{take, k, nullptr});
      left -= take;
      room -= take;
      if (room == 0 && agent + 1 < designs.size()) {
        ++agent;
        room = budget.per_agent_budget;
      }
    }
  }
  return designs;
}

}  // namespace internal

inline AllocationPlan Allocate(SamplingMethod method, CollabStrategy strategy,
                               const GroundTruth& gt, const BudgetSpec& budget,
                               const AllocationOptions& options = {}) {
  if (gt.m != budget.num_agents) {
    Fail(ErrorCategory::kAllocation, "ground truth has " + std::to_string(gt.m) +
                                         " attributes but budget has " +
                                         std::to_string(budget.num_agents) + " agents");
  }
  const int m = gt.m;
  const std::int64_t R = budget.per_agent_budget;
  AllocationPlan plan;
  plan.method = method;
  plan.strategy = strategy;
  plan.budget = budget;
  plan.m = m;

  const bool joint_design = strategy == CollabStrategy::kAPriori;
  if (!joint_design) {
    for (int i = 0; i < m; ++i) {
      const auto w1 = std::make_shared<const std::vector<double>>(
          internal::FillWeights(gt, i, 1, options.fill));
      const auto w0 = std::make_shared<const std::vector<double>>(
          internal::FillWeights(gt, i, 0, options.fill));
      std::int64_t n1 = 0;
      switch (method) {
        case SamplingMethod::kUniform: {
          const double p = gt.attr_marginal[static_cast<std::size_t>(i)];
          const double real[] = {p * static_cast<double>(R), (1.0 - p) * static_cast<double>(R)};
          n1 = RoundAllocation(real, R)[0];
          break;
        }
        case SamplingMethod::kStratified: {
          const double real[] = {static_cast<double>(R) / 2.0, static_cast<double>(R) / 2.0};
          n1 = RoundAllocation(real, R)[0];
          break;
        }
        case SamplingMethod::kNeyman: {
          if (R < 2) Fail(ErrorCategory::kAllocation, "Neyman sampling needs R >= 2");
          n1 = NeymanTwoGroup(GroundTruthSigma(gt, i, 1), GroundTruthSigma(gt, i, 0), R).n1;
          break;
        }
      }
      const std::int64_t n0 = R - n1;
      if (n1 == 0 || n0 == 0) {
        Fail(ErrorCategory::kAllocation, "attribute " + std::to_string(i) + " group " +
                                             (n1 == 0 ? "1" : "0") +
                                             " receives no queries at R=" + std::to_string(R));
      }
      AgentDesign design;
      design.cells.push_back(QueryCell{n1, std::nullopt, w1});
      design.cells.push_back(QueryCell{n0, std::nullopt, w0});
      plan.designs.push_back(std::move(design));
    }
  } else {
    switch (method) {
      case SamplingMethod::kUniform: {
        const auto w = std::make_shared<const std::vector<double>>(
            internal::PopulationWeights(gt, options.fill));
        plan.designs.assign(static_cast<std::size_t>(m),
                            AgentDesign{{QueryCell{R, std::nullopt, w}}});
        break;
      }
      case SamplingMethod::kStratified: {
        const std::size_t active = gt.num_nonempty();
        if (budget.total() < static_cast<std::int64_t>(active)) {
          Fail(ErrorCategory::kAllocation, "pooled budget cannot cover every stratum");
        }
        std::vector<double> real(gt.num_strata(), 0.0);
        for (std::size_t k = 0; k < real.size(); ++k) {
          if (!gt.is_empty(k)) {
            real[k] = static_cast<double>(budget.total()) / static_cast<double>(active);
          }
        }
        plan.designs = internal::SplitPooled(RoundAllocation(real, budget.total()), budget);
        break;
      }
      case SamplingMethod::kNeyman: {
        JointOptions joint = options.joint;
        plan.designs = internal::SplitPooled(NeymanJointInteger(gt, budget, joint), budget);
        break;
      }
    }
  }

  plan.counts.assign(static_cast<std::size_t>(m), std::vector<std::int64_t>(gt.num_strata(), 0));
  for (int a = 0; a < m; ++a) {
    for (const QueryCell& cell : plan.designs[static_cast<std::size_t>(a)].cells) {
      internal::ExpandCell(cell, plan.counts[static_cast<std::size_t>(a)]);
    }
  }
  return plan;
}

}  // namespace fairaudit

#endif  // FAIRAUDIT_ALLOCATION_HPP_
