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

// Command-line front end: ingest, audit, sweep-budget, sweep-agents and
// bounds-check. Exit status is 0 on success and the error category code
// otherwise.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairaudit.hpp"

namespace {

using fairaudit::ErrorCategory;
using fairaudit::ExperimentConfig;
using fairaudit::Fail;

struct Flags {
  std::string config;
  std::string dataset;
  std::string schema;
  std::vector<std::string> attrs;
  std::vector<std::string> methods;
  std::vector<std::string> strategies;
  std::int64_t budget = 0;
  std::vector<std::int64_t> budgets;
  std::vector<int> agents;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string summary_out;
  std::string weights;
  std::string fill;
  std::string neyman_apriori;
  int threads = 0;
  double template_marginal = -1.0;
  double template_lo = -1.0;
  double template_hi = -1.0;
  int template_m = 0;
  std::vector<CLI::Option*> given;
  CLI::Option* seed_opt = nullptr;
};

void AddCommonFlags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON experiment config; flags override it");
  app->add_option("--dataset", f.dataset, "CSV dataset");
  app->add_option("--schema", f.schema, "JSON binarization schema");
  app->add_option("--attrs", f.attrs, "Attribute names to audit, in agent order")->delimiter(',');
  app->add_option("--method", f.methods, "uniform, stratified, neyman or all")->delimiter(',');
  app->add_option("--strategy", f.strategies, "none, aposteriori, apriori or all")
      ->delimiter(',');
  app->add_option("--budget", f.budget, "Per-agent query budget R");
  app->add_option("--budgets", f.budgets, "Budget list for sweeps")->delimiter(',');
  app->add_option("--agents", f.agents, "Agent counts for sweeps")->delimiter(',');
  app->add_option("--reps", f.reps, "Monte-Carlo repetitions");
  f.seed_opt = app->add_option("--seed", f.seed, "Base seed");
  app->add_option("--out", f.out, "Output CSV (default: standard output)");
  app->add_option("--weights", f.weights, "Estimator stratum weights: empirical or independent");
  app->add_option("--fill", f.fill,
                  "Distribution of the attributes an agent does not control: empirical or "
                  "independent");
  app->add_option("--neyman-apriori", f.neyman_apriori,
                  "Closed form for neyman/apriori: scaled or joint");
  app->add_option("--threads", f.threads, "Worker threads for repetitions");
  app->add_option("--template-marginal", f.template_marginal,
                  "Synthetic instance: P(X_i = 1) of every attribute");
  app->add_option("--template-lo", f.template_lo, "Synthetic instance: lowest stratum rate");
  app->add_option("--template-hi", f.template_hi, "Synthetic instance: highest stratum rate");
  app->add_option("--m", f.template_m, "Synthetic instance: number of attributes");
}

ExperimentConfig BuildConfig(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : ExperimentConfig::Load(f.config);
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (!f.schema.empty()) c.schema = f.schema;
  if (!f.attrs.empty()) c.attributes = f.attrs;
  if (!f.methods.empty()) c.methods = ExperimentConfig::ParseMethods(f.methods);
  if (!f.strategies.empty()) c.strategies = ExperimentConfig::ParseStrategies(f.strategies);
  if (!f.budgets.empty()) c.budgets = f.budgets;
  if (f.budget != 0) c.budgets = {f.budget};
  if (!f.agents.empty()) c.agents = f.agents;
  if (f.reps != 0) c.repetitions = f.reps;
  if (f.seed_opt != nullptr && f.seed_opt->count() > 0) c.base_seed = f.seed;
  if (!f.out.empty()) c.output = f.out;
  if (!f.weights.empty()) c.weights = ExperimentConfig::ParseWeightMode(f.weights);
  if (!f.fill.empty()) c.fill = ExperimentConfig::ParseWeightMode(f.fill);
  if (!f.neyman_apriori.empty()) {
    c.neyman_apriori = ExperimentConfig::ParseNeymanForm(f.neyman_apriori);
  }
  if (f.threads != 0) c.threads = f.threads;
  if (f.template_marginal >= 0.0 || f.template_lo >= 0.0 || f.template_hi >= 0.0) {
    fairaudit::SyntheticTemplate t = c.synthetic.value_or(fairaudit::SyntheticTemplate{});
    if (f.template_marginal >= 0.0) t.marginal = f.template_marginal;
    if (f.template_lo >= 0.0) t.rate_lo = f.template_lo;
    if (f.template_hi >= 0.0) t.rate_hi = f.template_hi;
    c.synthetic = t;
  }
  if (f.template_m != 0) c.synthetic_m = f.template_m;
  c.Validate();
  return c;
}

// Writes to the configured path, or standard output.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) Fail(ErrorCategory::kIo, "cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool to_stdout() const { return !file_; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string Fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string Sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(3) << v;
  return s.str();
}

int RunIngest(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : ExperimentConfig::Load(f.config);
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (!f.schema.empty()) c.schema = f.schema;
  if (!f.attrs.empty()) c.attributes = f.attrs;
  if (c.dataset.empty() || c.schema.empty()) {
    Fail(ErrorCategory::kConfiguration, "ingest needs --dataset and --schema");
  }
  const fairaudit::LoadedDataset ds = fairaudit::LoadDataset(c);
  const fairaudit::Population pop = fairaudit::Population::FromDataset(ds.data, ds.pool);
  const fairaudit::GroundTruth& gt = pop.ground_truth();
  Output out(f.out);
  std::ostream& os = out.stream();
  os << "# dataset " << ds.data.schema.name << ": rows_read=" << ds.data.rows_read
     << " rows_filtered=" << ds.data.rows_filtered
     << " rows_dropped_missing=" << ds.data.rows_dropped_missing
     << " rows_used=" << ds.data.size() << " strata=" << gt.num_strata()
     << " empty_strata=" << gt.num_strata() - gt.num_nonempty() << '\n';
  os << "attribute,P,dp,rate_1,rate_0,sigma_1,sigma_0\n";
  for (int i = 0; i < gt.m; ++i) {
    const auto u = static_cast<std::size_t>(i);
    os << fairaudit::CsvEscape(pop.attribute_names()[u]) << ','
       << fairaudit::FormatDouble(gt.attr_marginal[u]) << ','
       << fairaudit::FormatDouble(gt.true_dp[u]) << ','
       << fairaudit::FormatDouble(fairaudit::GroupRate(gt, i, 1)) << ','
       << fairaudit::FormatDouble(fairaudit::GroupRate(gt, i, 0)) << ','
       << fairaudit::FormatDouble(fairaudit::GroundTruthSigma(gt, i, 1)) << ','
       << fairaudit::FormatDouble(fairaudit::GroundTruthSigma(gt, i, 0)) << '\n';
  }
  return 0;
}

void PrintSummary(const fairaudit::AuditRun& run, std::ostream& os) {
  os << std::left << std::setw(24) << "pair" << std::setw(12) << "mean_error" << std::setw(12)
     << "closed_form" << "failed\n";
  for (const fairaudit::PairSummary& s : run.summaries) {
    os << std::setw(24) << s.pair.name() << std::setw(12) << Fixed(s.mean_average_error)
       << std::setw(12) << Fixed(s.closed_form_error) << s.repetitions_failed << '\n';
    if (!s.first_error.empty()) os << "  first failure: " << s.first_error << '\n';
  }
}

int RunAuditCommand(const Flags& f) {
  const ExperimentConfig c = BuildConfig(f);
  Output out(c.output);
  fairaudit::AuditRun run;
  if (c.synthetic) {
    const fairaudit::BernoulliOracle oracle(
        fairaudit::TemplateGroundTruth(*c.synthetic, c.synthetic_m));
    std::vector<std::string> names;
    for (int j = 0; j < c.synthetic_m; ++j) names.push_back("X" + std::to_string(j));
    run = fairaudit::RunAudit(oracle, names, c.budgets.front(), c.pairs(), c.repetitions,
                              c.base_seed, c.simulation_options());
  } else {
    const fairaudit::LoadedDataset ds = fairaudit::LoadDataset(c);
    std::vector<int> attrs = ds.pool;
    if (!c.agents.empty()) attrs.resize(static_cast<std::size_t>(c.agents.front()));
    const fairaudit::Population pop = fairaudit::Population::FromDataset(ds.data, attrs);
    run = fairaudit::RunAudit(fairaudit::PopulationOracle(pop), ds.names(attrs),
                              c.budgets.front(), c.pairs(), c.repetitions, c.base_seed,
                              c.simulation_options());
  }
  run.WriteCsv(out.stream());
  PrintSummary(run, out.to_stdout() ? std::cerr : std::cout);
  return 0;
}

int RunSweep(const Flags& f, bool agents) {
  const ExperimentConfig c = BuildConfig(f);
  if (c.synthetic) Fail(ErrorCategory::kConfiguration, "sweeps need a dataset");
  const fairaudit::LoadedDataset ds = fairaudit::LoadDataset(c);
  const auto rows = agents ? fairaudit::SweepAgents(c, ds) : fairaudit::SweepBudget(c, ds);
  Output out(c.output);
  fairaudit::WriteSweepCsv(out.stream(), rows);
  return 0;
}

int RunBoundsCheck(const Flags& f) {
  ExperimentConfig c = BuildConfig(f);
  fairaudit::BoundsCheckResult result;
  if (c.synthetic) {
    const fairaudit::BernoulliOracle oracle(
        fairaudit::TemplateGroundTruth(*c.synthetic, c.synthetic_m));
    std::vector<std::string> names;
    for (int j = 0; j < c.synthetic_m; ++j) names.push_back("X" + std::to_string(j));
    result = fairaudit::BoundsCheck(oracle, names, c.budgets.front(), c.repetitions,
                                    c.base_seed, c.simulation_options());
  } else {
    const fairaudit::LoadedDataset ds = fairaudit::LoadDataset(c);
    const fairaudit::Population pop = fairaudit::Population::FromDataset(ds.data, ds.pool);
    result = fairaudit::BoundsCheck(fairaudit::PopulationOracle(pop), ds.names(ds.pool),
                                    c.budgets.front(), c.repetitions, c.base_seed,
                                    c.simulation_options());
  }
  Output out(c.output);
  if (!out.to_stdout()) result.report.WriteCsv(out.stream());
  std::ostream& os = std::cout;
  os << std::left << std::setw(32) << "relation" << std::setw(12) << "kind" << std::setw(12)
     << "lhs" << std::setw(12) << "rhs" << std::setw(14) << "slack" << "result\n";
  for (const fairaudit::RelationResult& r : result.report.relations) {
    std::string verdict = r.holds ? "PASS" : "FAIL";
    if (!r.applicable) verdict = "n/a";
    else if (r.informational) verdict = r.holds ? "witnessed" : "not witnessed";
    os << std::setw(32) << r.id << std::setw(12) << fairaudit::RelationKindName(r.kind)
       << std::setw(12) << Fixed(r.lhs, 5) << std::setw(12) << Fixed(r.rhs, 5) << std::setw(14)
       << Sci(r.slack) << verdict << "  " << r.statement
       << '\n';
  }
  if (!result.consistency.empty()) {
    os << "\nempirical sd of estimates vs closed form (" << c.repetitions << " repetitions)\n";
    result.WriteConsistencyCsv(os);
  }
  return result.report.all_passed() ? 0 : static_cast<int>(ErrorCategory::kContract);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent demographic parity audit simulator"};
  app.require_subcommand(1);
  Flags ingest, audit, sweep_budget, sweep_agents, bounds;
  CLI::App* cmd_ingest = app.add_subcommand("ingest", "Validate a dataset and print ground truth");
  AddCommonFlags(cmd_ingest, ingest);
  CLI::App* cmd_audit = app.add_subcommand("audit", "Monte-Carlo audit of one configuration");
  AddCommonFlags(cmd_audit, audit);
  CLI::App* cmd_budget = app.add_subcommand("sweep-budget", "Mean error per budget R");
  AddCommonFlags(cmd_budget, sweep_budget);
  CLI::App* cmd_agents = app.add_subcommand("sweep-agents", "Mean error per agent count m");
  AddCommonFlags(cmd_agents, sweep_agents);
  CLI::App* cmd_bounds = app.add_subcommand("bounds-check", "Check the closed-form relations");
  AddCommonFlags(cmd_bounds, bounds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::kConfiguration);
  }
  try {
    if (cmd_ingest->parsed()) return RunIngest(ingest);
    if (cmd_audit->parsed()) return RunAuditCommand(audit);
    if (cmd_budget->parsed()) return RunSweep(sweep_budget, false);
    if (cmd_agents->parsed()) return RunSweep(sweep_agents, true);
    if (cmd_bounds->parsed()) return RunBoundsCheck(bounds);
  } catch (const fairaudit::Error& e) {
    std::cerr << "fairaudit: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "fairaudit: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
