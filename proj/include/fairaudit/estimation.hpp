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

#ifndef FAIRAUDIT_ESTIMATION_HPP_
#define FAIRAUDIT_ESTIMATION_HPP_

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/csv.hpp"
#include "fairaudit/datamodel.hpp"
#include "fairaudit/error.hpp"

namespace fairaudit {

// Per-stratum query and response tallies of one agent, or of all agents when
// pooled.
class QueryLog {
 public:
  QueryLog() = default;
  QueryLog(int m, int owner, bool pooled = false)
      : m_(m), owner_(owner), pooled_(pooled), sent_(NumStrata(m), 0), positives_(NumStrata(m), 0) {}

  int m() const { return m_; }
  int owner() const { return owner_; }
  bool pooled() const { return pooled_; }
  std::size_t num_strata() const { return sent_.size(); }
  std::int64_t sent(std::size_t k) const { return sent_[k]; }
  std::int64_t positives(std::size_t k) const { return positives_[k]; }

  void Record(std::size_t stratum, int response) {
    if (stratum >= sent_.size()) {
      Fail(ErrorCategory::kContract, "stratum " + std::to_string(stratum) + " out of range");
    }
    ++sent_[stratum];
    if (response != 0) ++positives_[stratum];
  }

  // Adds `n` queries with `pos` positives to a stratum.
  void Add(std::size_t stratum, std::int64_t n, std::int64_t pos) {
    if (stratum >= sent_.size() || n < 0 || pos < 0 || pos > n) {
      Fail(ErrorCategory::kContract, "invalid tally for stratum " + std::to_string(stratum));
    }
    sent_[stratum] += n;
    positives_[stratum] += pos;
  }

  void Merge(const QueryLog& other) {
    if (other.m_ != m_) Fail(ErrorCategory::kContract, "merging logs of different m");
    for (std::size_t k = 0; k < sent_.size(); ++k) {
      sent_[k] += other.sent_[k];
      positives_[k] += other.positives_[k];
    }
    pooled_ = true;
  }

  static QueryLog Pool(std::span<const QueryLog> logs) {
    if (logs.empty()) Fail(ErrorCategory::kContract, "pooling zero logs");
    QueryLog out(logs[0].m(), -1, true);
    for (const QueryLog& l : logs) out.Merge(l);
    return out;
  }

  std::int64_t total_sent() const {
    std::int64_t t = 0;
    for (std::int64_t n : sent_) t += n;
    return t;
  }

  // (queries, positives) in the X_attr = value group.
  std::pair<std::int64_t, std::int64_t> GroupTally(int attr, int value) const {
    std::int64_t n = 0, pos = 0;
    for (std::size_t k = 0; k < sent_.size(); ++k) {
      if (StratumBit(k, attr) == value) {
        n += sent_[k];
        pos += positives_[k];
      }
    }
    return {n, pos};
  }

 private:
  int m_ = 0;
  int owner_ = -1;
  bool pooled_ = false;
  std::vector<std::int64_t> sent_;
  std::vector<std::int64_t> positives_;
};

namespace internal {

inline void CheckAttr(const QueryLog& log, int attr) {
  if (attr < 0 || attr >= log.m()) {
    Fail(ErrorCategory::kContract, "attribute " + std::to_string(attr) + " out of range");
  }
}

}  // namespace internal

// Difference of pooled positive rates between the two groups of `attr`.
inline double EstimateDpSimple(const QueryLog& log, int attr) {
  internal::CheckAttr(log, attr);
  const auto [n1, pos1] = log.GroupTally(attr, 1);
  const auto [n0, pos0] = log.GroupTally(attr, 0);
  if (n1 == 0 || n0 == 0) {
    Fail(ErrorCategory::kEstimation, "attribute " + std::to_string(attr) + " group " +
                                         (n1 == 0 ? "1" : "0") + " has no queries");
  }
  return static_cast<double>(pos1) / static_cast<double>(n1) -
         static_cast<double>(pos0) / static_cast<double>(n0);
}

enum class MissingStrata {
  kError,        // any positively weighted stratum without queries fails
  kRenormalize,  // drop it and renormalise the remaining weights
};

// Stratum-weighted estimate sum_k w1_k Yhat_k - sum_k w0_k Yhat_k with w the
// conditional weights P(S_k | X_attr = value).
inline double EstimateDpStratified(const QueryLog& log, int attr, const GroundTruth& gt,
                                   WeightMode weights = WeightMode::kEmpirical,
                                   MissingStrata missing = MissingStrata::kError) {
  internal::CheckAttr(log, attr);
  if (gt.m != log.m()) Fail(ErrorCategory::kContract, "log and ground truth disagree on m");
  double estimate = 0.0;
  for (int value : {1, 0}) {
    const std::vector<double> w = ConditionalWeights(gt, attr, value, weights);
    double mass = 0.0, sum = 0.0;
    std::vector<std::size_t> unqueried;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (!(w[k] > 0.0)) continue;
      if (log.sent(k) == 0) {
        unqueried.push_back(k);
        continue;
      }
      mass += w[k];
      sum += w[k] * static_cast<double>(log.positives(k)) / static_cast<double>(log.sent(k));
    }
    if (!unqueried.empty() && (missing == MissingStrata::kError || !(mass > 0.0))) {
      std::string list;
      for (std::size_t k : unqueried) list += (list.empty() ? "" : " ") + std::to_string(k);
      Fail(ErrorCategory::kEstimation, "attribute " + std::to_string(attr) + " group " +
                                           std::to_string(value) +
                                           ": strata without queries: " + list);
    }
    estimate += (value == 1 ? 1.0 : -1.0) * sum / mass;
  }
  return estimate;
}

// sqrt(s1^2 / R1) + sqrt(s0^2 / R0).
inline double StandardError(double sigma1, double sigma0, double r1, double r0) {
  if (!(r1 > 0.0) || !(r0 > 0.0)) {
    Fail(ErrorCategory::kDomain, "standard error needs positive group counts");
  }
  if (!(sigma1 >= 0.0) || !(sigma0 >= 0.0)) {
    Fail(ErrorCategory::kDomain, "standard deviations must be nonnegative");
  }
  return sigma1 / std::sqrt(r1) + sigma0 / std::sqrt(r0);
}

// Standard deviation of the difference of the two independent group means,
// sqrt(s1^2 / R1 + s0^2 / R0).
inline double SamplingSd(double sigma1, double sigma0, double r1, double r0) {
  if (!(r1 > 0.0) || !(r0 > 0.0)) {
    Fail(ErrorCategory::kDomain, "sampling deviation needs positive group counts");
  }
  return std::sqrt(sigma1 * sigma1 / r1 + sigma0 * sigma0 / r0);
}

inline double PluginSigma(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) Fail(ErrorCategory::kDomain, "rate outside [0, 1]");
  return std::sqrt(rate * (1.0 - rate));
}

inline double AverageDpError(std::span<const double> errors) {
  if (errors.empty()) Fail(ErrorCategory::kDomain, "average of zero errors");
  double sum = 0.0;
  for (double e : errors) sum += e;
  return sum / static_cast<double>(errors.size());
}

// Band of |D| inside which an attribute is considered to respect demographic
// parity.
inline constexpr double kParityBand = 0.2;

struct AuditOutcome {
  std::vector<double> dp_true;
  std::vector<double> dp_estimate;
  std::vector<double> dp_error;  // |estimate - true|
  std::vector<std::pair<std::int64_t, std::int64_t>> group_counts;  // (R_i, R_i_bar)
  double average_error = 0.0;

  static AuditOutcome Make(std::vector<double> truth, std::vector<double> estimate,
                           std::vector<std::pair<std::int64_t, std::int64_t>> counts) {
    if (truth.size() != estimate.size() || truth.size() != counts.size() || truth.empty()) {
      Fail(ErrorCategory::kContract, "audit outcome vectors differ in length");
    }
    AuditOutcome out;
    out.dp_true = std::move(truth);
    out.dp_estimate = std::move(estimate);
    out.group_counts = std::move(counts);
    for (std::size_t i = 0; i < out.dp_true.size(); ++i) {
      out.dp_error.push_back(std::abs(out.dp_estimate[i] - out.dp_true[i]));
    }
    out.average_error = AverageDpError(out.dp_error);
    return out;
  }

  std::size_t num_agents() const { return dp_true.size(); }
  double signed_error(std::size_t i) const { return dp_estimate[i] - dp_true[i]; }
  bool estimate_within_band(std::size_t i) const {
    return std::abs(dp_estimate[i]) <= kParityBand;
  }
};

inline void WriteOutcomeHeader(std::ostream& out) {
  out << "method,strategy,repetition,agent,attribute,dp_true,dp_estimate,abs_error,"
         "R_i,R_i_bar,signed_error,within_parity_band\n";
}

inline void WriteOutcomeRows(std::ostream& out, const std::string& method,
                             const std::string& strategy, std::int64_t repetition,
                             const std::vector<std::string>& attribute_names,
                             const AuditOutcome& outcome) {
  for (std::size_t i = 0; i < outcome.num_agents(); ++i) {
    const std::string attr = i < attribute_names.size() ? attribute_names[i] : std::to_string(i);
    out << method << ',' << strategy << ',' << repetition << ',' << i << ',' << CsvEscape(attr)
        << ',' << FormatDouble(outcome.dp_true[i]) << ',' << FormatDouble(outcome.dp_estimate[i])
        << ',' << FormatDouble(outcome.dp_error[i]) << ',' << outcome.group_counts[i].first << ','
        << outcome.group_counts[i].second << ',' << FormatDouble(outcome.signed_error(i)) << ','
        << (outcome.estimate_within_band(i) ? 1 : 0) << '\n';
  }
}

}  // namespace fairaudit

#endif  // FAIRAUDIT_ESTIMATION_HPP_
