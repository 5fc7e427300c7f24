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

#ifndef FAIRAUDIT_BOUNDS_HPP_
#define FAIRAUDIT_BOUNDS_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/allocation.hpp"
#include "fairaudit/csv.hpp"
#include "fairaudit/datamodel.hpp"
#include "fairaudit/dataset.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/estimation.hpp"

namespace fairaudit {

// How the Neyman a-priori error is evaluated.
enum class NeymanAprioriForm {
  kScaled,  // each agent's two-group optimum with m times the budget
  kJoint,   // optimum of the average stratified error over all 2^m strata
};

struct BoundsOptions {
  NeymanAprioriForm neyman_apriori = NeymanAprioriForm::kScaled;
  WeightMode weights = WeightMode::kEmpirical;
};

// The two group terms of an agent's error; the error is their sum and the
// sampling deviation of the estimate their root sum of squares.
struct GroupTerms {
  double favored = 0.0;
  double unfavored = 0.0;
  double error() const { return favored + unfavored; }
  double sampling_sd() const { return std::sqrt(favored * favored + unfavored * unfavored); }
};

namespace internal {

inline GroupTerms CountTerms(double s1, double s0, double r1, double r0,
                             SamplingMethod method, CollabStrategy strategy, int attr) {
  if (!(r1 > 0.0) || !(r0 > 0.0)) {
    Fail(ErrorCategory::kDomain, MethodName(method) + "/" + StrategyName(strategy) +
                                     ": degenerate group count for attribute " +
                                     std::to_string(attr));
  }
  return {s1 / std::sqrt(r1), s0 / std::sqrt(r0)};
}

// Stratified-estimator group terms sqrt(sum_k w_k^2 s_k^2 / R_k) for a
// per-stratum allocation.
inline std::vector<GroupTerms> StratumTerms(const GroundTruth& gt, std::span<const double> alloc,
                                            WeightMode weights) {
  const JointObjective f(gt, weights);
  const std::vector<double> g = f.GroupErrors(alloc);
  std::vector<GroupTerms> out;
  for (int i = 0; i < gt.m; ++i) {
    out.push_back({g[2 * static_cast<std::size_t>(i)], g[2 * static_cast<std::size_t>(i) + 1]});
  }
  return out;
}

}  // namespace internal

// Per-agent group terms at the real-valued query counts of the given pair.
inline std::vector<GroupTerms> ClosedFormTerms(SamplingMethod method, CollabStrategy strategy,
                                               const GroundTruth& gt, const BudgetSpec& budget,
                                               const BoundsOptions& options = {}) {
  if (gt.m != budget.num_agents) {
    Fail(ErrorCategory::kDomain, "ground truth has " + std::to_string(gt.m) +
                                     " attributes but budget has " +
                                     std::to_string(budget.num_agents) + " agents");
  }
  const int m = gt.m;
  const auto R = static_cast<double>(budget.per_agent_budget);
  const auto md = static_cast<double>(m);

  if (strategy == CollabStrategy::kAPriori && method == SamplingMethod::kStratified) {
    std::vector<double> alloc(gt.num_strata(), 0.0);
    const auto active = static_cast<double>(gt.num_nonempty());
    for (std::size_t k = 0; k < alloc.size(); ++k) {
      if (!gt.is_empty(k)) alloc[k] = md * R / active;
    }
    return internal::StratumTerms(gt, alloc, options.weights);
  }
  if (strategy == CollabStrategy::kAPriori && method == SamplingMethod::kNeyman &&
      options.neyman_apriori == NeymanAprioriForm::kJoint) {
    JointOptions joint;
    joint.weights = options.weights;
    const JointResult opt = NeymanJoint(gt, budget, joint);
    return internal::StratumTerms(gt, opt.allocation, options.weights);
  }

  std::vector<GroupTerms> out;
  for (int i = 0; i < m; ++i) {
    const double p = gt.attr_marginal[static_cast<std::size_t>(i)];
    const double s1 = GroundTruthSigma(gt, i, 1);
    const double s0 = GroundTruthSigma(gt, i, 0);
    // Counts from the agent's own plan.
    double own1 = 0.0;
    switch (method) {
      case SamplingMethod::kUniform: own1 = p * R; break;
      case SamplingMethod::kStratified: own1 = R / 2.0; break;
      case SamplingMethod::kNeyman: own1 = NeymanTwoGroupContinuous(s1, s0, R); break;
    }
    double r1 = own1, r0 = R - own1;
    switch (strategy) {
      case CollabStrategy::kNoCollab: break;
      case CollabStrategy::kAPosteriori:
        // The other agents' queries are uniform with respect to attribute i.
        r1 += (md - 1.0) * p * R;
        r0 += (md - 1.0) * (1.0 - p) * R;
        break;
      case CollabStrategy::kAPriori:
        r1 *= md;
        r0 *= md;
        break;
    }
    out.push_back(internal::CountTerms(s1, s0, r1, r0, method, strategy, i));
  }
  return out;
}

inline std::vector<double> ClosedFormAgentErrors(SamplingMethod method, CollabStrategy strategy,
                                                 const GroundTruth& gt, const BudgetSpec& budget,
                                                 const BoundsOptions& options = {}) {
  std::vector<double> out;
  for (const GroupTerms& t : ClosedFormTerms(method, strategy, gt, budget, options)) {
    out.push_back(t.error());
  }
  return out;
}

inline double ClosedFormError(SamplingMethod method, CollabStrategy strategy,
                              const GroundTruth& gt, const BudgetSpec& budget,
                              const BoundsOptions& options = {}) {
  return AverageDpError(ClosedFormAgentErrors(method, strategy, gt, budget, options));
}

// Average error of the joint Neyman design over all 2^m strata.
inline double JointNeymanDesignError(const GroundTruth& gt, const BudgetSpec& budget,
                                     WeightMode weights = WeightMode::kEmpirical) {
  JointOptions joint;
  joint.weights = weights;
  return NeymanJoint(gt, budget, joint).objective;
}

// A one-attribute template replicated into m independent attributes:
// every P_i equals `marginal` and Y_k = rate_lo + (rate_hi - rate_lo) * |k| / m,
// where |k| counts the favored bits of stratum k.
struct SyntheticTemplate {
  double marginal = 0.5;
  double rate_lo = 0.3;
  double rate_hi = 0.6;
};

inline GroundTruth TemplateGroundTruth(const SyntheticTemplate& t, int m) {
  CheckAttributeCount(m);
  if (!(t.marginal > 0.0 && t.marginal < 1.0)) {
    Fail(ErrorCategory::kConfiguration, "template marginal must lie in (0, 1)");
  }
  if (!(t.rate_lo >= 0.0 && t.rate_lo <= 1.0 && t.rate_hi >= 0.0 && t.rate_hi <= 1.0)) {
    Fail(ErrorCategory::kConfiguration, "template rates must lie in [0, 1]");
  }
  const std::size_t n = NumStrata(m);
  std::vector<double> prob(n), rate(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int ones = std::popcount(static_cast<std::uint32_t>(k));
    prob[k] = std::pow(t.marginal, ones) * std::pow(1.0 - t.marginal, m - ones);
    rate[k] = t.rate_lo + (t.rate_hi - t.rate_lo) * ones / m;
  }
  return GroundTruth::FromStrata(m, std::move(prob), std::move(rate));
}

struct ScanRow {
  int m = 0;
  // [method][strategy] in enum order.
  double error[3][3] = {};
  double ratio_neyman = 0.0;      // Neyman/APosteriori over Uniform/APosteriori
  double ratio_stratified = 0.0;  // Stratified/APosteriori over Uniform/APosteriori

  double at(SamplingMethod method, CollabStrategy strategy) const {
    return error[static_cast<int>(method)][static_cast<int>(strategy)];
  }
};

inline std::vector<ScanRow> AsymptoticScan(const SyntheticTemplate& t, int m_lo, int m_hi,
                                           std::int64_t R, const BoundsOptions& options = {}) {
  if (m_lo < 1 || m_hi < m_lo || m_hi > kMaxAttributes) {
    Fail(ErrorCategory::kConfiguration, "scan range [" + std::to_string(m_lo) + ", " +
                                            std::to_string(m_hi) + "] outside [1, " +
                                            std::to_string(kMaxAttributes) + "]");
  }
  std::vector<ScanRow> rows;
  for (int m = m_lo; m <= m_hi; ++m) {
    const GroundTruth gt = TemplateGroundTruth(t, m);
    const BudgetSpec budget(R, m);
    ScanRow row;
    row.m = m;
    for (SamplingMethod method : kAllMethods) {
      for (CollabStrategy strategy : kAllStrategies) {
        row.error[static_cast<int>(method)][static_cast<int>(strategy)] =
            ClosedFormError(method, strategy, gt, budget, options);
      }
    }
    const double uniform = row.at(SamplingMethod::kUniform, CollabStrategy::kAPosteriori);
    row.ratio_neyman = row.at(SamplingMethod::kNeyman, CollabStrategy::kAPosteriori) / uniform;
    row.ratio_stratified =
        row.at(SamplingMethod::kStratified, CollabStrategy::kAPosteriori) / uniform;
    rows.push_back(row);
  }
  return rows;
}

inline void WriteScanCsv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << "m,quantity,value\n";
  for (const ScanRow& row : rows) {
    for (SamplingMethod method : kAllMethods) {
      for (CollabStrategy strategy : kAllStrategies) {
        out << row.m << ",error_" << MethodName(method) << '_' << StrategyName(strategy) << ','
            << FormatDouble(row.at(method, strategy)) << '\n';
      }
    }
    out << row.m << ",ratio_neyman_over_uniform_aposteriori," << FormatDouble(row.ratio_neyman)
        << '\n';
    out << row.m << ",ratio_stratified_over_uniform_aposteriori,"
        << FormatDouble(row.ratio_stratified) << '\n';
  }
}

enum class RelationKind { kEquality, kInequality, kAsymptotic, kExistence };

inline std::string RelationKindName(RelationKind k) {
  switch (k) {
    case RelationKind::kEquality: return "equality";
    case RelationKind::kInequality: return "inequality";
    case RelationKind::kAsymptotic: return "asymptotic";
    case RelationKind::kExistence: return "existence";
  }
  return "?";
}

inline constexpr double kEqualityTolerance = 1e-9;
inline constexpr double kInequalitySlack = -1e-12;

struct RelationResult {
  std::string id;
  RelationKind kind = RelationKind::kEquality;
  std::string statement;
  double lhs = 0.0;
  double rhs = 0.0;
  // Inequalities: rhs - lhs. Equalities: -|lhs - rhs| / max(|lhs|, |rhs|).
  // Asymptotic: margin of the trend test. Existence: rhs - lhs.
  double slack = 0.0;
  bool holds = false;
  bool applicable = true;
  // Existence witnesses and diagnostics do not count as failures.
  bool informational = false;

  bool passed() const { return !applicable || informational || holds; }
};

struct RelationReport {
  std::vector<RelationResult> relations;

  bool all_passed() const {
    return std::all_of(relations.begin(), relations.end(),
                       [](const RelationResult& r) { return r.passed(); });
  }

  const RelationResult& Get(const std::string& id) const {
    for (const RelationResult& r : relations) {
      if (r.id == id) return r;
    }
    Fail(ErrorCategory::kContract, "no relation '" + id + "'");
  }

  void WriteCsv(std::ostream& out) const {
    out << "relation,kind,statement,lhs,rhs,slack,holds,applicable,informational,passed\n";
    for (const RelationResult& r : relations) {
      out << r.id << ',' << RelationKindName(r.kind) << ',' << CsvEscape(r.statement) << ','
          << FormatDouble(r.lhs) << ',' << FormatDouble(r.rhs) << ',' << FormatDouble(r.slack)
          << ',' << r.holds << ',' << r.applicable << ',' << r.informational << ','
          << r.passed() << '\n';
    }
  }
};

inline RelationResult MakeEquality(std::string id, std::string statement, double lhs,
                                   double rhs) {
  RelationResult r;
  r.id = std::move(id);
  r.kind = RelationKind::kEquality;
  r.statement = std::move(statement);
  r.lhs = lhs;
  r.rhs = rhs;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  r.slack = -std::abs(lhs - rhs) / scale;
  r.holds = -r.slack <= kEqualityTolerance;
  return r;
}

// lhs <= rhs.
inline RelationResult MakeInequality(std::string id, std::string statement, double lhs,
                                     double rhs) {
  RelationResult r;
  r.id = std::move(id);
  r.kind = RelationKind::kInequality;
  r.statement = std::move(statement);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.holds = r.slack >= kInequalitySlack;
  return r;
}

// Trend thresholds for the asymptotic relations.
struct TrendOptions {
  int m_max = 12;
  int burn_in = 3;              // monotone approach required beyond this m
  double ratio_band = 0.05;     // |1 - ratio| at m_max
  int divergence_from = 6;      // strictly increasing on [divergence_from, m_max]
  std::int64_t scan_budget = 0;  // 0 uses the instance budget
};

// Equivalence to 1 of a ratio sequence: |1 - r| nonincreasing beyond the
// burn-in and within the band at the end.
inline RelationResult RatioTrend(std::string id, std::string statement,
                                 const std::vector<ScanRow>& scan, bool neyman,
                                 const TrendOptions& trend) {
  RelationResult r;
  r.id = std::move(id);
  r.kind = RelationKind::kAsymptotic;
  r.statement = std::move(statement);
  bool monotone = true;
  double prev = 0.0;
  bool have_prev = false;
  for (const ScanRow& row : scan) {
    const double gap = std::abs(1.0 - (neyman ? row.ratio_neyman : row.ratio_stratified));
    if (row.m >= trend.burn_in) {
      if (have_prev && gap > prev + 1e-12) monotone = false;
      prev = gap;
      have_prev = true;
    }
  }
  const ScanRow& last = scan.back();
  r.lhs = neyman ? last.ratio_neyman : last.ratio_stratified;
  r.rhs = 1.0;
  r.slack = trend.ratio_band - std::abs(1.0 - r.lhs);
  r.holds = monotone && r.slack >= 0.0;
  return r;
}

inline RelationResult DivergenceTrend(const GroundTruth& gt, const std::vector<ScanRow>& scan,
                                      const TrendOptions& trend) {
  RelationResult r;
  r.id = "stratified_apriori_divergence";
  r.kind = RelationKind::kAsymptotic;
  r.statement = "stratified/apriori grows without bound when every max(P_i, 1-P_i) > 1/sqrt(2)";
  r.applicable = true;
  for (double p : gt.attr_marginal) {
    if (!(std::max(p, 1.0 - p) > 1.0 / std::sqrt(2.0))) r.applicable = false;
  }
  double min_step = 1e300;
  double prev = 0.0;
  bool first = true;
  for (const ScanRow& row : scan) {
    if (row.m < trend.divergence_from) continue;
    const double e = row.at(SamplingMethod::kStratified, CollabStrategy::kAPriori);
    if (!first) min_step = std::min(min_step, e - prev);
    prev = e;
    first = false;
  }
  r.lhs = scan.back().at(SamplingMethod::kStratified, CollabStrategy::kAPriori);
  r.rhs = scan.front().at(SamplingMethod::kStratified, CollabStrategy::kAPriori);
  r.slack = first ? 0.0 : min_step;
  r.holds = !first && min_step > 0.0;
  return r;
}

// Template used for the trend checks of an instance: its average skew and the
// range of its group positive rates.
inline SyntheticTemplate TemplateFor(const GroundTruth& gt) {
  SyntheticTemplate t;
  double skew = 0.0;
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < gt.m; ++i) {
    const double p = gt.attr_marginal[static_cast<std::size_t>(i)];
    skew += std::max(p, 1.0 - p);
    for (int v : {0, 1}) {
      const double q = GroupRate(gt, i, v, WeightMode::kEmpirical);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
  }
  t.marginal = std::clamp(skew / gt.m, 1e-6, 1.0 - 1e-6);
  t.rate_lo = lo;
  t.rate_hi = hi;
  return t;
}

inline bool IsFair(const GroundTruth& gt, double tol = 1e-12) {
  double first = -1.0;
  for (std::size_t k = 0; k < gt.num_strata(); ++k) {
    if (gt.is_empty(k)) continue;
    if (first < 0.0) first = gt.stratum_positive_rate[k];
    if (std::abs(gt.stratum_positive_rate[k] - first) > tol) return false;
  }
  return true;
}

// Evaluates every relation between the closed-form errors on the instance.
// Asymptotic relations are checked on an m-scan of TemplateFor(gt).
inline RelationReport VerifyRelations(const GroundTruth& gt, const BudgetSpec& budget,
                                      const BoundsOptions& options = {},
                                      const TrendOptions& trend = {}) {
  using M = SamplingMethod;
  using S = CollabStrategy;
  auto cf = [&](M method, S strategy) {
    return ClosedFormError(method, strategy, gt, budget, options);
  };
  const double root_m = std::sqrt(static_cast<double>(gt.m));
  RelationReport report;
  auto& rel = report.relations;

  const double u_nc = cf(M::kUniform, S::kNoCollab);
  const double u_post = cf(M::kUniform, S::kAPosteriori);
  const double u_prio = cf(M::kUniform, S::kAPriori);
  rel.push_back(MakeEquality("uniform_apriori_eq_aposteriori", "uniform: apriori = aposteriori", u_prio, u_post));
  rel.push_back(MakeEquality("uniform_aposteriori_scaling", "uniform: aposteriori = nocollab / sqrt(m)", u_post,
                             u_nc / root_m));

  const double n_nc = cf(M::kNeyman, S::kNoCollab);
  const double n_post = cf(M::kNeyman, S::kAPosteriori);
  const double n_prio = cf(M::kNeyman, S::kAPriori);
  rel.push_back(MakeInequality("neyman_apriori_bound", "neyman: apriori <= nocollab / sqrt(m)", n_prio,
                               n_nc / root_m));
  rel.push_back(MakeInequality("neyman_nocollab_bound", "neyman nocollab / sqrt(m) <= uniform nocollab",
                               n_nc / root_m, u_nc));
  {
    BoundsOptions joint = options;
    joint.neyman_apriori = NeymanAprioriForm::kJoint;
    RelationResult r = MakeInequality(
        "neyman_apriori_joint_bound", "joint stratum design: apriori <= neyman nocollab / sqrt(m)",
        ClosedFormError(M::kNeyman, S::kAPriori, gt, budget, joint), n_nc / root_m);
    r.informational = true;
    rel.push_back(r);
  }
  rel.push_back(MakeInequality("neyman_aposteriori_gain", "neyman: aposteriori <= nocollab", n_post, n_nc));

  const double s_nc = cf(M::kStratified, S::kNoCollab);
  const double s_post = cf(M::kStratified, S::kAPosteriori);
  const double s_prio = cf(M::kStratified, S::kAPriori);
  rel.push_back(MakeInequality("stratified_aposteriori_gain", "stratified: aposteriori <= nocollab", s_post, s_nc));

  TrendOptions t = trend;
  const std::int64_t scan_r = t.scan_budget > 0 ? t.scan_budget : budget.per_agent_budget;
  const std::vector<ScanRow> scan = AsymptoticScan(TemplateFor(gt), 1, t.m_max, scan_r, options);
  rel.push_back(RatioTrend("neyman_aposteriori_limit", "neyman aposteriori ~ uniform aposteriori as m grows", scan,
                           true, t));
  rel.push_back(RatioTrend("stratified_aposteriori_limit", "stratified aposteriori ~ uniform aposteriori as m grows",
                           scan, false, t));
  rel.push_back(DivergenceTrend(gt, scan, t));

  {
    RelationResult r = MakeEquality("fair_stratified_eq_neyman", "fair model: stratified nocollab = neyman nocollab",
                                    s_nc, n_nc);
    r.applicable = IsFair(gt);
    rel.push_back(r);
  }
  {
    RelationResult r;
    r.id = "stratified_apriori_worse";
    r.kind = RelationKind::kExistence;
    r.statement = "stratified: aposteriori < apriori is witnessed";
    r.lhs = s_post;
    r.rhs = s_prio;
    r.slack = s_prio - s_post;
    r.holds = s_post < s_prio;
    r.informational = true;
    rel.push_back(r);
  }
  return report;
}

}  // namespace fairaudit

#endif  // FAIRAUDIT_BOUNDS_HPP_
