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

#ifndef FAIRAUDIT_SIMULATION_HPP_
#define FAIRAUDIT_SIMULATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fairaudit/allocation.hpp"
#include "fairaudit/bounds.hpp"
#include "fairaudit/datamodel.hpp"
#include "fairaudit/dataset.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/estimation.hpp"
#include "fairaudit/random.hpp"
#include "json.hpp"

namespace fairaudit {

// Black box answering with a Bernoulli(Y_k) draw; used for synthetic
// instances that have no rows behind them.
class BernoulliOracle {
 public:
  explicit BernoulliOracle(GroundTruth gt) : gt_(std::move(gt)) {}
  const GroundTruth& ground_truth() const { return gt_; }
  int Respond(std::size_t stratum, Rng& rng) const {
    if (stratum >= gt_.num_strata() || gt_.is_empty(stratum)) {
      Fail(ErrorCategory::kOracle, "query to empty stratum " + std::to_string(stratum));
    }
    return rng.UniformDouble() < gt_.stratum_positive_rate[stratum] ? 1 : 0;
  }

 private:
  GroundTruth gt_;
};

// Black box answering with the label of a random row of the stratum.
class PopulationOracle {
 public:
  explicit PopulationOracle(const Population& pop) : pop_(&pop) {}
  const GroundTruth& ground_truth() const { return pop_->ground_truth(); }
  int Respond(std::size_t stratum, Rng& rng) const {
    return fairaudit::Respond(*pop_, stratum, rng);
  }

 private:
  const Population* pop_;
};

struct Pair {
  SamplingMethod method;
  CollabStrategy strategy;
  bool operator<(const Pair& o) const {
    return std::pair(method, strategy) < std::pair(o.method, o.strategy);
  }
  bool operator==(const Pair& o) const = default;
  std::string name() const { return MethodName(method) + "/" + StrategyName(strategy); }
};

inline std::vector<Pair> AllPairs() {
  std::vector<Pair> out;
  for (SamplingMethod m : kAllMethods) {
    for (CollabStrategy s : kAllStrategies) out.push_back({m, s});
  }
  return out;
}

struct SimulationOptions {
  AllocationOptions allocation;
  WeightMode weights = WeightMode::kEmpirical;  // estimator stratum weights
  BoundsOptions bounds;
  int threads = 1;
};

// Outcome of one pair in one repetition; `error` is set instead of
// `outcome` when the pair failed.
struct PairRecord {
  std::int64_t repetition = 0;
  Pair pair{};
  std::optional<AuditOutcome> outcome;
  std::string error;
};

struct PairSummary {
  Pair pair{};
  std::int64_t repetitions_ok = 0;
  std::int64_t repetitions_failed = 0;
  double mean_average_error = 0.0;
  std::vector<double> mean_estimate;  // per agent
  std::vector<double> sd_estimate;    // per agent, over repetitions
  std::vector<double> mean_abs_error;  // per agent
  double closed_form_error = 0.0;
  std::vector<double> closed_form_sd;  // per agent, root-sum-of-squares form
  std::vector<std::pair<double, double>> expected_group_counts;
  std::string first_error;
};

struct AuditRun {
  std::vector<std::string> attribute_names;
  BudgetSpec budget;
  std::vector<PairRecord> records;  // ordered by (repetition, pair)
  std::vector<PairSummary> summaries;

  const PairSummary& Summary(const Pair& p) const {
    for (const PairSummary& s : summaries) {
      if (s.pair == p) return s;
    }
    Fail(ErrorCategory::kContract, "pair " + p.name() + " was not run");
  }

  void WriteCsv(std::ostream& out) const {
    WriteOutcomeHeader(out);
    for (const PairRecord& r : records) {
      if (!r.outcome) continue;
      WriteOutcomeRows(out, MethodName(r.pair.method), StrategyName(r.pair.strategy),
                       r.repetition, attribute_names, *r.outcome);
    }
  }

  void WriteSummaryCsv(std::ostream& out) const {
    out << "method,strategy,R,m,repetitions_ok,repetitions_failed,mean_average_error,"
           "closed_form_error\n";
    for (const PairSummary& s : summaries) {
      out << MethodName(s.pair.method) << ',' << StrategyName(s.pair.strategy) << ','
          << budget.per_agent_budget << ',' << budget.num_agents << ',' << s.repetitions_ok
          << ',' << s.repetitions_failed << ',' << FormatDouble(s.mean_average_error) << ','
          << FormatDouble(s.closed_form_error) << '\n';
    }
  }
};

namespace internal {

// An allocation plan with a sampler for every randomly filled cell.
struct RealizedPlan {
  AllocationPlan plan;
  std::vector<std::vector<std::optional<DiscreteSampler>>> samplers;  // [agent][cell]

  explicit RealizedPlan(AllocationPlan p) : plan(std::move(p)) {
    std::map<const std::vector<double>*, DiscreteSampler> cache;
    for (const AgentDesign& d : plan.designs) {
      std::vector<std::optional<DiscreteSampler>> row;
      for (const QueryCell& c : d.cells) {
        if (c.stratum) {
          row.emplace_back();
          continue;
        }
        auto it = cache.find(c.weights.get());
        if (it == cache.end()) it = cache.emplace(c.weights.get(), DiscreteSampler(*c.weights)).first;
        row.emplace_back(it->second);
      }
      samplers.push_back(std::move(row));
    }
  }

  template <typename Oracle>
  QueryLog Query(int agent, const Oracle& oracle, Rng& rng) const {
    QueryLog log(plan.m, agent);
    const auto a = static_cast<std::size_t>(agent);
    const AgentDesign& d = plan.designs[a];
    for (std::size_t c = 0; c < d.cells.size(); ++c) {
      const QueryCell& cell = d.cells[c];
      if (cell.stratum) {
        std::int64_t pos = 0;
        for (std::int64_t q = 0; q < cell.quota; ++q) pos += oracle.Respond(*cell.stratum, rng);
        log.Add(*cell.stratum, cell.quota, pos);
      } else {
        const DiscreteSampler& s = *samplers[a][c];
        for (std::int64_t q = 0; q < cell.quota; ++q) {
          const std::size_t k = s.Sample(rng);
          log.Record(k, oracle.Respond(k, rng));
        }
      }
    }
    return log;
  }
};

inline std::uint64_t DesignTag(SamplingMethod method, bool apriori, int agent) {
  return static_cast<std::uint64_t>(static_cast<int>(method) * 1000 + (apriori ? 100 : 0) + agent);
}

}  // namespace internal

// Estimate of D_i for agent `agent` from the logs of one repetition.
inline double EstimateForPair(const Pair& pair, int agent, const QueryLog& own,
                              const QueryLog& pooled, const GroundTruth& gt, WeightMode weights) {
  if (pair.strategy == CollabStrategy::kNoCollab) return EstimateDpSimple(own, agent);
  if (pair.method == SamplingMethod::kUniform) return EstimateDpSimple(pooled, agent);
  const MissingStrata missing = pair.strategy == CollabStrategy::kAPosteriori
                                    ? MissingStrata::kRenormalize
                                    : MissingStrata::kError;
  return EstimateDpStratified(pooled, agent, gt, weights, missing);
}

// Monte-Carlo audit of the requested pairs. Within a repetition the no
// collaboration and a-posteriori pairs of a method share the same queries.
template <typename Oracle>
AuditRun RunAudit(const Oracle& oracle, const std::vector<std::string>& attribute_names,
                  std::int64_t per_agent_budget, const std::vector<Pair>& pairs,
                  std::int64_t repetitions, std::uint64_t base_seed,
                  const SimulationOptions& options = {}) {
  const GroundTruth& gt = oracle.ground_truth();
  const int m = gt.m;
  if (repetitions < 1) Fail(ErrorCategory::kConfiguration, "repetitions must be >= 1");
  AuditRun run;
  run.attribute_names = attribute_names;
  run.budget = BudgetSpec(per_agent_budget, m);

  std::vector<Pair> order = pairs;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  // Plans; a failed allocation marks the pair failed in every repetition.
  std::map<std::pair<SamplingMethod, bool>, std::optional<internal::RealizedPlan>> plans;
  std::map<std::pair<SamplingMethod, bool>, std::string> plan_errors;
  for (const Pair& p : order) {
    const bool apriori = p.strategy == CollabStrategy::kAPriori;
    const auto key = std::pair(p.method, apriori);
    if (plans.count(key) != 0) continue;
    try {
      plans[key].emplace(Allocate(p.method, apriori ? CollabStrategy::kAPriori
                                                    : CollabStrategy::kNoCollab,
                                  gt, run.budget, options.allocation));
    } catch (const Error& e) {
      plans[key] = std::nullopt;
      plan_errors[key] = e.what();
    }
  }

  const auto reps = static_cast<std::size_t>(repetitions);
  std::vector<std::vector<PairRecord>> per_rep(reps);
  auto do_rep = [&](std::size_t r) {
    const std::uint64_t seed = RepetitionSeed(base_seed, r);
    std::map<std::pair<SamplingMethod, bool>, std::vector<QueryLog>> logs;
    std::map<std::pair<SamplingMethod, bool>, std::string> query_errors;
    for (const auto& [key, plan] : plans) {
      if (!plan) continue;
      try {
        std::vector<QueryLog> agent_logs;
        for (int a = 0; a < m; ++a) {
          Rng rng(StreamSeed(seed, internal::DesignTag(key.first, key.second, a)));
          agent_logs.push_back(plan->Query(a, oracle, rng));
        }
        logs[key] = std::move(agent_logs);
      } catch (const Error& e) {
        query_errors[key] = e.what();
      }
    }
    for (const Pair& p : order) {
      PairRecord rec;
      rec.repetition = static_cast<std::int64_t>(r);
      rec.pair = p;
      const auto key = std::pair(p.method, p.strategy == CollabStrategy::kAPriori);
      try {
        if (!plans[key]) Fail(ErrorCategory::kAllocation, plan_errors[key]);
        if (logs.count(key) == 0) Fail(ErrorCategory::kOracle, query_errors[key]);
        const std::vector<QueryLog>& agent_logs = logs.at(key);
        const QueryLog pooled = QueryLog::Pool(agent_logs);
        std::vector<double> estimate;
        std::vector<std::pair<std::int64_t, std::int64_t>> counts;
        for (int a = 0; a < m; ++a) {
          const QueryLog& own = agent_logs[static_cast<std::size_t>(a)];
          estimate.push_back(EstimateForPair(p, a, own, pooled, gt, options.weights));
          const QueryLog& used = p.strategy == CollabStrategy::kNoCollab ? own : pooled;
          counts.push_back({used.GroupTally(a, 1).first, used.GroupTally(a, 0).first});
        }
        rec.outcome = AuditOutcome::Make(gt.true_dp, std::move(estimate), std::move(counts));
      } catch (const Error& e) {
        rec.error = "repetition " + std::to_string(r) + ", " + p.name() + ": " + e.what();
      }
      per_rep[r].push_back(std::move(rec));
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(reps)));
  if (threads == 1) {
    for (std::size_t r = 0; r < reps; ++r) do_rep(r);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t r = static_cast<std::size_t>(t); r < reps;
             r += static_cast<std::size_t>(threads)) {
          do_rep(r);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }
  for (auto& rep_records : per_rep) {
    for (PairRecord& rec : rep_records) run.records.push_back(std::move(rec));
  }

  for (const Pair& p : order) {
    PairSummary s;
    s.pair = p;
    const auto md = static_cast<std::size_t>(m);
    s.mean_estimate.assign(md, 0.0);
    s.sd_estimate.assign(md, 0.0);
    s.mean_abs_error.assign(md, 0.0);
    std::vector<double> sq(md, 0.0);
    for (const PairRecord& rec : run.records) {
      if (!(rec.pair == p)) continue;
      if (!rec.outcome) {
        ++s.repetitions_failed;
        if (s.first_error.empty()) s.first_error = rec.error;
        continue;
      }
      ++s.repetitions_ok;
      s.mean_average_error += rec.outcome->average_error;
      for (std::size_t i = 0; i < md; ++i) {
        s.mean_estimate[i] += rec.outcome->dp_estimate[i];
        sq[i] += rec.outcome->dp_estimate[i] * rec.outcome->dp_estimate[i];
        s.mean_abs_error[i] += rec.outcome->dp_error[i];
      }
    }
    if (s.repetitions_ok > 0) {
      const auto n = static_cast<double>(s.repetitions_ok);
      s.mean_average_error /= n;
      for (std::size_t i = 0; i < md; ++i) {
        s.mean_estimate[i] /= n;
        s.mean_abs_error[i] /= n;
        const double var = n > 1 ? (sq[i] - n * s.mean_estimate[i] * s.mean_estimate[i]) / (n - 1) : 0.0;
        s.sd_estimate[i] = std::sqrt(std::max(0.0, var));
      }
    }
    try {
      const auto terms = ClosedFormTerms(p.method, p.strategy, gt, run.budget, options.bounds);
      double total = 0.0;
      for (const GroupTerms& t : terms) {
        total += t.error();
        s.closed_form_sd.push_back(t.sampling_sd());
      }
      s.closed_form_error = total / m;
    } catch (const Error&) {
      s.closed_form_error = std::nan("");
    }
    const auto key = std::pair(p.method, p.strategy == CollabStrategy::kAPriori);
    if (plans[key]) {
      AllocationPlan plan = plans[key]->plan;
      plan.strategy = p.strategy;
      for (int a = 0; a < m; ++a) s.expected_group_counts.push_back(plan.ExpectedGroupCounts(a));
    }
    run.summaries.push_back(std::move(s));
  }
  return run;
}

// Experiment protocol; loaded from a JSON document, then overridden by flags.
struct ExperimentConfig {
  std::string dataset;
  std::string schema;
  std::vector<std::string> attributes;  // empty: every schema attribute
  std::vector<SamplingMethod> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<CollabStrategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::vector<std::int64_t> budgets{250};
  std::vector<int> agents;  // empty: all selected attributes
  std::int64_t repetitions = 300;
  std::uint64_t base_seed = 0;
  std::string output;
  WeightMode weights = WeightMode::kEmpirical;
  WeightMode fill = WeightMode::kEmpirical;
  NeymanAprioriForm neyman_apriori = NeymanAprioriForm::kScaled;
  int threads = 1;
  std::optional<SyntheticTemplate> synthetic;  // replaces the dataset
  int synthetic_m = 5;

  std::vector<Pair> pairs() const {
    std::vector<Pair> out;
    for (SamplingMethod m : methods) {
      for (CollabStrategy s : strategies) out.push_back({m, s});
    }
    return out;
  }

  SimulationOptions simulation_options() const {
    SimulationOptions o;
    o.allocation.fill = fill;
    o.allocation.joint.weights = weights;
    o.weights = weights;
    o.bounds.weights = weights;
    o.bounds.neyman_apriori = neyman_apriori;
    o.threads = threads;
    return o;
  }

  void Validate() const {
    if (repetitions < 1) Fail(ErrorCategory::kConfiguration, "repetitions must be >= 1");
    if (budgets.empty()) Fail(ErrorCategory::kConfiguration, "no budget given");
    for (std::int64_t b : budgets) {
      if (b < 1) Fail(ErrorCategory::kConfiguration, "budgets must be positive");
    }
    if (methods.empty() || strategies.empty()) {
      Fail(ErrorCategory::kConfiguration, "no method or strategy selected");
    }
    if (threads < 1) Fail(ErrorCategory::kConfiguration, "threads must be >= 1");
    for (int a : agents) {
      if (a < 1) Fail(ErrorCategory::kConfiguration, "agent counts must be positive");
      if (!attributes.empty() && a > static_cast<int>(attributes.size())) {
        Fail(ErrorCategory::kConfiguration, "agent count " + std::to_string(a) +
                                                " exceeds the " +
                                                std::to_string(attributes.size()) +
                                                " selected attributes");
      }
    }
    if (!synthetic && (dataset.empty() || schema.empty())) {
      Fail(ErrorCategory::kConfiguration, "dataset and schema are required");
    }
  }

  static WeightMode ParseWeightMode(const std::string& s) {
    if (s == "empirical") return WeightMode::kEmpirical;
    if (s == "independent") return WeightMode::kIndependent;
    Fail(ErrorCategory::kConfiguration, "weight mode must be empirical or independent, got '" +
                                            s + "'");
  }

  static NeymanAprioriForm ParseNeymanForm(const std::string& s) {
    if (s == "scaled") return NeymanAprioriForm::kScaled;
    if (s == "joint") return NeymanAprioriForm::kJoint;
    Fail(ErrorCategory::kConfiguration, "neyman a-priori form must be scaled or joint, got '" +
                                            s + "'");
  }

  // Keys mirror the fields; "methods"/"strategies" accept "all".
  static ExperimentConfig FromJson(const nlohmann::json& doc) {
    ExperimentConfig c;
    try {
      if (!doc.is_object()) Fail(ErrorCategory::kConfiguration, "config must be an object");
      if (doc.contains("dataset")) c.dataset = doc["dataset"].get<std::string>();
      if (doc.contains("schema")) c.schema = doc["schema"].get<std::string>();
      if (doc.contains("attributes")) {
        c.attributes = doc["attributes"].get<std::vector<std::string>>();
      }
      if (doc.contains("methods")) c.methods = ParseMethods(ListOf(doc["methods"]));
      if (doc.contains("strategies")) c.strategies = ParseStrategies(ListOf(doc["strategies"]));
      if (doc.contains("budget")) c.budgets = {doc["budget"].get<std::int64_t>()};
      if (doc.contains("budgets")) c.budgets = doc["budgets"].get<std::vector<std::int64_t>>();
      if (doc.contains("agents")) c.agents = doc["agents"].get<std::vector<int>>();
      if (doc.contains("repetitions")) c.repetitions = doc["repetitions"].get<std::int64_t>();
      if (doc.contains("seed")) c.base_seed = doc["seed"].get<std::uint64_t>();
      if (doc.contains("output")) c.output = doc["output"].get<std::string>();
      if (doc.contains("weights")) c.weights = ParseWeightMode(doc["weights"].get<std::string>());
      if (doc.contains("fill")) c.fill = ParseWeightMode(doc["fill"].get<std::string>());
      if (doc.contains("neyman_apriori")) {
        c.neyman_apriori = ParseNeymanForm(doc["neyman_apriori"].get<std::string>());
      }
      if (doc.contains("threads")) c.threads = doc["threads"].get<int>();
      if (doc.contains("synthetic")) {
        const auto& t = doc["synthetic"];
        SyntheticTemplate s;
        s.marginal = t.value("marginal", s.marginal);
        s.rate_lo = t.value("rate_lo", s.rate_lo);
        s.rate_hi = t.value("rate_hi", s.rate_hi);
        c.synthetic = s;
        c.synthetic_m = t.value("m", c.synthetic_m);
      }
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCategory::kConfiguration, std::string("config: ") + e.what());
    }
    return c;
  }

  static ExperimentConfig Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) Fail(ErrorCategory::kIo, "cannot open config '" + path + "'");
    try {
      return FromJson(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      Fail(ErrorCategory::kConfiguration, "config '" + path + "': " + e.what());
    }
  }

  static std::vector<std::string> ListOf(const nlohmann::json& v) {
    if (v.is_string()) return {v.get<std::string>()};
    return v.get<std::vector<std::string>>();
  }

  static std::vector<SamplingMethod> ParseMethods(const std::vector<std::string>& names) {
    if (names.size() == 1 && names[0] == "all") {
      return {std::begin(kAllMethods), std::end(kAllMethods)};
    }
    std::vector<SamplingMethod> out;
    for (const std::string& n : names) out.push_back(ParseMethod(n));
    return out;
  }

  static std::vector<CollabStrategy> ParseStrategies(const std::vector<std::string>& names) {
    if (names.size() == 1 && names[0] == "all") {
      return {std::begin(kAllStrategies), std::end(kAllStrategies)};
    }
    std::vector<CollabStrategy> out;
    for (const std::string& n : names) out.push_back(ParseStrategy(n));
    return out;
  }
};

// Dataset with the attribute pool of a config resolved to schema indices.
struct LoadedDataset {
  Dataset data;
  std::vector<int> pool;  // schema indices, in audit order

  std::vector<std::string> names(std::span<const int> attrs) const {
    std::vector<std::string> out;
    for (int a : attrs) out.push_back(data.schema.attributes[static_cast<std::size_t>(a)].name);
    return out;
  }
};

inline LoadedDataset LoadDataset(const ExperimentConfig& config) {
  LoadedDataset out;
  out.data = IngestFile(config.dataset, DatasetSchema::Load(config.schema));
  if (config.attributes.empty()) {
    for (int j = 0; j < out.data.schema.num_attributes(); ++j) out.pool.push_back(j);
  } else {
    for (const std::string& name : config.attributes) {
      out.pool.push_back(out.data.schema.AttributeIndex(name));
    }
  }
  return out;
}

// All size-k subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> Combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  for (;;) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

struct SweepRow {
  std::int64_t budget = 0;
  int m = 0;
  Pair pair{};
  double mean_error = 0.0;
  double closed_form_error = 0.0;
  std::int64_t subsets = 0;
  std::int64_t failed_repetitions = 0;
};

inline void WriteSweepCsv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "R,m,method,strategy,mean_error,closed_form_error,subsets,failed_repetitions\n";
  for (const SweepRow& r : rows) {
    out << r.budget << ',' << r.m << ',' << MethodName(r.pair.method) << ','
        << StrategyName(r.pair.strategy) << ',' << FormatDouble(r.mean_error) << ','
        << FormatDouble(r.closed_form_error) << ',' << r.subsets << ',' << r.failed_repetitions
        << '\n';
  }
}

// Mean errors at (R, m), averaged over every size-m subset of the pool.
inline std::vector<SweepRow> AverageOverSubsets(const LoadedDataset& ds, int m, std::int64_t R,
                                                const ExperimentConfig& config) {
  const auto combos = Combinations(static_cast<int>(ds.pool.size()), m);
  if (combos.empty()) {
    Fail(ErrorCategory::kConfiguration, "cannot choose " + std::to_string(m) + " of " +
                                            std::to_string(ds.pool.size()) + " attributes");
  }
  const std::vector<Pair> pairs = config.pairs();
  std::vector<SweepRow> rows(pairs.size());
  std::vector<std::int64_t> ok(pairs.size(), 0);
  for (const auto& combo : combos) {
    std::vector<int> attrs;
    for (int c : combo) attrs.push_back(ds.pool[static_cast<std::size_t>(c)]);
    const Population pop = Population::FromDataset(ds.data, attrs);
    const AuditRun run = RunAudit(PopulationOracle(pop), ds.names(attrs), R, pairs,
                                  config.repetitions, config.base_seed,
                                  config.simulation_options());
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const PairSummary& s = run.Summary(pairs[j]);
      SweepRow& row = rows[j];
      row.pair = pairs[j];
      row.budget = R;
      row.m = m;
      row.failed_repetitions += s.repetitions_failed;
      if (s.repetitions_ok > 0) {
        row.mean_error += s.mean_average_error;
        row.closed_form_error += s.closed_form_error;
        ++ok[j];
      }
      ++row.subsets;
    }
  }
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (ok[j] > 0) {
      rows[j].mean_error /= static_cast<double>(ok[j]);
      rows[j].closed_form_error /= static_cast<double>(ok[j]);
    } else {
      rows[j].mean_error = rows[j].closed_form_error = std::nan("");
    }
  }
  return rows;
}

inline int DefaultAgents(const ExperimentConfig& config, const LoadedDataset& ds) {
  return config.agents.empty() ? static_cast<int>(ds.pool.size()) : config.agents.front();
}

inline std::vector<SweepRow> SweepBudget(const ExperimentConfig& config, const LoadedDataset& ds) {
  std::vector<SweepRow> out;
  const int m = DefaultAgents(config, ds);
  for (std::int64_t R : config.budgets) {
    for (SweepRow& r : AverageOverSubsets(ds, m, R, config)) out.push_back(r);
  }
  return out;
}

inline std::vector<SweepRow> SweepAgents(const ExperimentConfig& config, const LoadedDataset& ds) {
  std::vector<int> ms = config.agents;
  if (ms.empty()) {
    for (int m = 1; m <= static_cast<int>(ds.pool.size()); ++m) ms.push_back(m);
  }
  std::vector<SweepRow> out;
  for (int m : ms) {
    for (SweepRow& r : AverageOverSubsets(ds, m, config.budgets.front(), config)) {
      out.push_back(r);
    }
  }
  return out;
}

// Empirical deviation of the estimates against the closed-form value.
struct ConsistencyRow {
  Pair pair{};
  int agent = 0;
  double empirical_sd = 0.0;
  double closed_form_sd = 0.0;
  double ratio() const { return empirical_sd / closed_form_sd; }
};

struct BoundsCheckResult {
  RelationReport report;
  std::vector<ConsistencyRow> consistency;

  void WriteConsistencyCsv(std::ostream& out) const {
    out << "method,strategy,agent,empirical_sd,closed_form_sd,ratio\n";
    for (const ConsistencyRow& r : consistency) {
      out << MethodName(r.pair.method) << ',' << StrategyName(r.pair.strategy) << ','
          << r.agent << ',' << FormatDouble(r.empirical_sd) << ','
          << FormatDouble(r.closed_form_sd) << ',' << FormatDouble(r.ratio()) << '\n';
    }
  }
};

template <typename Oracle>
BoundsCheckResult BoundsCheck(const Oracle& oracle, const std::vector<std::string>& names,
                              std::int64_t R, std::int64_t repetitions, std::uint64_t seed,
                              const SimulationOptions& options = {}) {
  BoundsCheckResult out;
  const GroundTruth& gt = oracle.ground_truth();
  out.report = VerifyRelations(gt, BudgetSpec(R, gt.m), options.bounds);
  if (repetitions > 1) {
    const AuditRun run = RunAudit(oracle, names, R, AllPairs(), repetitions, seed, options);
    for (const PairSummary& s : run.summaries) {
      if (s.repetitions_ok < 2 || s.closed_form_sd.empty()) continue;
      for (int a = 0; a < gt.m; ++a) {
        const auto i = static_cast<std::size_t>(a);
        out.consistency.push_back({s.pair, a, s.sd_estimate[i], s.closed_form_sd[i]});
      }
    }
  }
  return out;
}

}  // namespace fairaudit

#endif  // FAIRAUDIT_SIMULATION_HPP_
