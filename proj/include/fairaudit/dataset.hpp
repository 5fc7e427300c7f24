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

#ifndef FAIRAUDIT_DATASET_HPP_
#define FAIRAUDIT_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairaudit/csv.hpp"
#include "fairaudit/datamodel.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/random.hpp"
#include "json.hpp"

namespace fairaudit {

namespace internal {

inline std::optional<double> ParseNumber(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || std::isnan(v)) return std::nullopt;
  return v;
}

inline std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace internal

enum class CompareOp { kLt, kLe, kGt, kGe, kEq, kNe };

inline CompareOp ParseCompareOp(const std::string& s) {
  if (s == "<") return CompareOp::kLt;
  if (s == "<=") return CompareOp::kLe;
  if (s == ">") return CompareOp::kGt;
  if (s == ">=") return CompareOp::kGe;
  if (s == "==") return CompareOp::kEq;
  if (s == "!=") return CompareOp::kNe;
  Fail(ErrorCategory::kSchema, "unknown comparison operator '" + s + "'");
}

// `raw <op> value`, numerically when both sides parse as numbers, otherwise
// as strings (only == and != are defined for strings).
struct Comparison {
  CompareOp op = CompareOp::kEq;
  std::string value;

  bool Holds(const std::string& raw) const {
    const auto lhs = internal::ParseNumber(raw);
    const auto rhs = internal::ParseNumber(value);
    if (lhs && rhs) {
      switch (op) {
        case CompareOp::kLt: return *lhs < *rhs;
        case CompareOp::kLe: return *lhs <= *rhs;
        case CompareOp::kGt: return *lhs > *rhs;
        case CompareOp::kGe: return *lhs >= *rhs;
        case CompareOp::kEq: return *lhs == *rhs;
        case CompareOp::kNe: return *lhs != *rhs;
      }
    }
    switch (op) {
      case CompareOp::kEq: return raw == value;
      case CompareOp::kNe: return raw != value;
      default: return false;
    }
  }
};

// What to do with a missing raw value in an attribute column.
enum class MissingPolicy { kDrop, kNegative };

// How one raw column becomes a binary protected attribute. Either a set of
// raw values mapping to 1 (numbers compare numerically) or a threshold test.
struct AttributeSchema {
  std::string name;
  std::string source_column;
  std::vector<std::string> positive_values;
  std::optional<Comparison> threshold;
  MissingPolicy missing = MissingPolicy::kDrop;

  bool IsPositive(const std::string& raw) const {
    if (threshold) return threshold->Holds(raw);
    const auto num = internal::ParseNumber(raw);
    for (const std::string& v : positive_values) {
      if (raw == v) return true;
      if (num) {
        const auto pv = internal::ParseNumber(v);
        if (pv && *pv == *num) return true;
      }
    }
    return false;
  }
};

struct RowFilter {
  std::string column;
  Comparison test;
};

struct DatasetSchema {
  std::string name;
  std::string label_column;
  std::vector<std::string> label_positive_values;
  std::vector<AttributeSchema> attributes;
  std::vector<RowFilter> filters;
  std::vector<std::string> missing_tokens = {"", "NA", "N/A", "NaN", "nan", "null"};

  int num_attributes() const { return static_cast<int>(attributes.size()); }

  int AttributeIndex(const std::string& attr_name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      if (attributes[i].name == attr_name) return static_cast<int>(i);
    }
    Fail(ErrorCategory::kConfiguration, "schema '" + name +
                                            "' has no attribute named '" +
                                            attr_name + "'");
  }

  bool IsMissing(const std::string& raw) const {
    return std::find(missing_tokens.begin(), missing_tokens.end(), raw) !=
           missing_tokens.end();
  }

  bool LabelIsPositive(const std::string& raw) const {
    AttributeSchema as_attr;
    as_attr.positive_values = label_positive_values;
    return as_attr.IsPositive(raw);
  }

  void Validate() const {
    if (label_column.empty()) Fail(ErrorCategory::kSchema, "label column is empty");
    if (label_positive_values.empty()) {
      Fail(ErrorCategory::kSchema, "label has no positive values");
    }
    if (attributes.empty()) Fail(ErrorCategory::kSchema, "schema has no attributes");
    if (num_attributes() > kMaxAttributes) {
      Fail(ErrorCategory::kSchema, "too many attributes");
    }
    std::set<std::string> names;
    for (const AttributeSchema& a : attributes) {
      if (a.name.empty() || a.source_column.empty()) {
        Fail(ErrorCategory::kSchema, "attribute with empty name or column");
      }
      if (!names.insert(a.name).second) {
        Fail(ErrorCategory::kSchema, "duplicate attribute name '" + a.name + "'");
      }
      if (a.source_column == label_column) {
        Fail(ErrorCategory::kSchema,
             "attribute '" + a.name + "' reads the label column");
      }
      if (a.positive_values.empty() && !a.threshold) {
        Fail(ErrorCategory::kSchema,
             "attribute '" + a.name + "' has neither positive_values nor threshold");
      }
    }
  }

  // Schema document:
  // {
  //   "name": "...",
  //   "label": {"column": "...", "positive_values": ["1"]},
  //   "attributes": [
  //     {"name": "...", "source_column": "...", "positive_values": [...]},
  //     {"name": "...", "source_column": "...",
  //      "threshold": {"op": ">=", "value": 25}, "missing": "negative"}
  //   ],
  //   "filters": [{"column": "...", "op": "<=", "value": 30}],
  //   "missing_tokens": ["", "NA"]
  // }
  static DatasetSchema FromJson(const nlohmann::json& doc) {
    auto as_string = [](const nlohmann::json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number_integer()) return std::to_string(v.get<long long>());
      if (v.is_number()) return FormatDouble(v.get<double>());
      if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
      Fail(ErrorCategory::kSchema, "expected a scalar value, got " + v.dump());
    };
    try {
      DatasetSchema s;
      s.name = doc.value("name", std::string("dataset"));
      const auto& label = doc.at("label");
      s.label_column = label.at("column").get<std::string>();
      for (const auto& v : label.at("positive_values")) {
        s.label_positive_values.push_back(as_string(v));
      }
      for (const auto& a : doc.at("attributes")) {
        AttributeSchema attr;
        attr.name = a.at("name").get<std::string>();
        attr.source_column = a.at("source_column").get<std::string>();
        if (a.contains("positive_values")) {
          for (const auto& v : a.at("positive_values")) {
            attr.positive_values.push_back(as_string(v));
          }
        }
        if (a.contains("threshold")) {
          const auto& t = a.at("threshold");
          attr.threshold = Comparison{ParseCompareOp(t.at("op").get<std::string>()),
                                      as_string(t.at("value"))};
        }
        const std::string missing = a.value("missing", std::string("drop"));
        if (missing == "drop") {
          attr.missing = MissingPolicy::kDrop;
        } else if (missing == "negative") {
          attr.missing = MissingPolicy::kNegative;
        } else {
          Fail(ErrorCategory::kSchema, "unknown missing policy '" + missing + "'");
        }
        s.attributes.push_back(std::move(attr));
      }
      if (doc.contains("filters")) {
        for (const auto& f : doc.at("filters")) {
          s.filters.push_back(
              RowFilter{f.at("column").get<std::string>(),
                        Comparison{ParseCompareOp(f.at("op").get<std::string>()),
                                   as_string(f.at("value"))}});
        }
      }
      if (doc.contains("missing_tokens")) {
        s.missing_tokens.clear();
        for (const auto& v : doc.at("missing_tokens")) {
          s.missing_tokens.push_back(as_string(v));
        }
      }
      s.Validate();
      return s;
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCategory::kSchema, std::string("malformed schema: ") + e.what());
    }
  }

  static DatasetSchema Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) Fail(ErrorCategory::kIo, "cannot open schema file " + path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCategory::kSchema, path + ": " + e.what());
    }
    return FromJson(doc);
  }
};

// Binarized rows over every schema attribute. Bit j of `row_bits[r]` is the
// value of schema attribute j.
struct Dataset {
  DatasetSchema schema;
  std::vector<std::uint32_t> row_bits;
  std::vector<std::uint8_t> labels;
  std::size_t rows_read = 0;
  std::size_t rows_filtered = 0;
  std::size_t rows_dropped_missing = 0;

  std::size_t size() const { return labels.size(); }
};

inline Dataset Ingest(std::istream& csv, const DatasetSchema& schema) {
  schema.Validate();
  CsvReader reader(csv);
  std::vector<std::string> header;
  if (!reader.Next(header)) Fail(ErrorCategory::kIngestion, "empty CSV input");
  // Duplicate header names resolve to the first occurrence.
  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t c = 0; c < header.size(); ++c) {
    column_of.emplace(internal::Trim(header[c]), c);
  }
  auto column = [&](const std::string& name) {
    const auto it = column_of.find(name);
    if (it == column_of.end()) {
      Fail(ErrorCategory::kSchema, "CSV has no column '" + name + "'");
    }
    return it->second;
  };
  const std::size_t label_col = column(schema.label_column);
  std::vector<std::size_t> attr_cols;
  for (const AttributeSchema& a : schema.attributes) {
    attr_cols.push_back(column(a.source_column));
  }
  std::vector<std::size_t> filter_cols;
  for (const RowFilter& f : schema.filters) filter_cols.push_back(column(f.column));

  Dataset ds;
  ds.schema = schema;
  std::vector<std::string> row;
  while (reader.Next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    if (row.size() != header.size()) {
      Fail(ErrorCategory::kIngestion,
           "record " + std::to_string(reader.record_number()) + " has " +
               std::to_string(row.size()) + " fields, header has " +
               std::to_string(header.size()));
    }
    ++ds.rows_read;
    bool keep = true;
    for (std::size_t f = 0; f < schema.filters.size() && keep; ++f) {
      const std::string& raw = row[filter_cols[f]];
      keep = !schema.IsMissing(raw) && schema.filters[f].test.Holds(raw);
    }
    if (!keep) {
      ++ds.rows_filtered;
      continue;
    }
    const std::string& label_raw = row[label_col];
    if (schema.IsMissing(label_raw)) {
      ++ds.rows_dropped_missing;
      continue;
    }
    std::uint32_t bits = 0;
    bool complete = true;
    for (std::size_t j = 0; j < attr_cols.size(); ++j) {
      const std::string& raw = row[attr_cols[j]];
      const AttributeSchema& a = schema.attributes[j];
      if (schema.IsMissing(raw)) {
        if (a.missing == MissingPolicy::kDrop) {
          complete = false;
          break;
        }
        continue;  // kNegative
      }
      if (a.IsPositive(raw)) bits |= std::uint32_t{1} << j;
    }
    if (!complete) {
      ++ds.rows_dropped_missing;
      continue;
    }
    ds.row_bits.push_back(bits);
    ds.labels.push_back(schema.LabelIsPositive(label_raw) ? 1 : 0);
  }
  if (ds.labels.empty()) {
    Fail(ErrorCategory::kIngestion, "no usable rows after filtering and dropping");
  }
  for (std::size_t j = 0; j < schema.attributes.size(); ++j) {
    std::size_t ones = 0;
    for (std::uint32_t b : ds.row_bits) ones += (b >> j) & 1u;
    if (ones == 0 || ones == ds.size()) {
      Fail(ErrorCategory::kSchema, "attribute '" + schema.attributes[j].name +
                                       "' is constant after binarization");
    }
  }
  return ds;
}

inline Dataset IngestFile(const std::string& path, const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCategory::kIo, "cannot open dataset " + path);
  return Ingest(in, schema);
}

// A dataset stratified over m audited attributes; the label of each row is
// the black box's response to that row.
class Population {
 public:
  // Stratifies `ds` over the schema attributes listed in `attrs` (audit
  // order: agent a audits attrs[a]).
  static Population FromDataset(const Dataset& ds, std::span<const int> attrs) {
    const int m = static_cast<int>(attrs.size());
    CheckAttributeCount(m);
    std::set<int> seen;
    for (int a : attrs) {
      if (a < 0 || a >= ds.schema.num_attributes()) {
        Fail(ErrorCategory::kConfiguration, "attribute index out of range");
      }
      if (!seen.insert(a).second) {
        Fail(ErrorCategory::kConfiguration, "attribute listed twice");
      }
    }
    Population pop;
    pop.labels_.assign(NumStrata(m), {});
    for (std::size_t r = 0; r < ds.size(); ++r) {
      std::size_t k = 0;
      for (int j = 0; j < m; ++j) {
        k |= static_cast<std::size_t>((ds.row_bits[r] >> attrs[static_cast<std::size_t>(j)]) & 1u) << j;
      }
      pop.labels_[k].push_back(ds.labels[r]);
    }
    for (int a : attrs) {
      pop.names_.push_back(ds.schema.attributes[static_cast<std::size_t>(a)].name);
    }
    pop.Finish(m);
    return pop;
  }

  // Every schema attribute, in schema order.
  static Population FromDataset(const Dataset& ds) {
    std::vector<int> all(static_cast<std::size_t>(ds.schema.num_attributes()));
    std::iota(all.begin(), all.end(), 0);
    return FromDataset(ds, all);
  }

  // Direct construction from per-stratum label multisets.
  static Population FromLabels(int m, std::vector<std::vector<std::uint8_t>> labels,
                               std::vector<std::string> names = {}) {
    if (labels.size() != NumStrata(m)) {
      Fail(ErrorCategory::kContract, "need one label list per stratum");
    }
    Population pop;
    pop.labels_ = std::move(labels);
    pop.names_ = std::move(names);
    if (pop.names_.empty()) {
      for (int j = 0; j < m; ++j) pop.names_.push_back("X" + std::to_string(j));
    }
    for (const auto& stratum : pop.labels_) {
      for (std::uint8_t y : stratum) {
        if (y > 1) Fail(ErrorCategory::kContract, "labels must be 0 or 1");
      }
    }
    pop.Finish(m);
    return pop;
  }

  int m() const { return ground_truth_.m; }
  const GroundTruth& ground_truth() const { return ground_truth_; }
  const std::vector<std::string>& attribute_names() const { return names_; }
  const std::vector<std::uint8_t>& stratum_labels(std::size_t k) const {
    return labels_.at(k);
  }
  std::size_t num_rows() const { return rows_; }

 private:
  void Finish(int m) {
    std::vector<std::int64_t> counts(labels_.size()), positives(labels_.size());
    rows_ = 0;
    for (std::size_t k = 0; k < labels_.size(); ++k) {
      counts[k] = static_cast<std::int64_t>(labels_[k].size());
      positives[k] = std::count(labels_[k].begin(), labels_[k].end(), std::uint8_t{1});
      rows_ += labels_[k].size();
    }
    ground_truth_ = GroundTruth::FromCounts(m, counts, positives);
  }

  std::vector<std::vector<std::uint8_t>> labels_;
  std::vector<std::string> names_;
  GroundTruth ground_truth_;
  std::size_t rows_ = 0;
};

inline Population IngestPopulation(std::istream& csv, const DatasetSchema& schema) {
  return Population::FromDataset(Ingest(csv, schema));
}

// Black-box response to a query in `stratum`: the label of a row drawn
// uniformly with replacement from that stratum.
inline int Respond(const Population& pop, std::size_t stratum, Rng& rng) {
  const auto& labels = pop.stratum_labels(stratum);
  if (labels.empty()) {
    Fail(ErrorCategory::kOracle,
         "query to empty stratum " + std::to_string(stratum));
  }
  return labels[rng.UniformIndex(labels.size())];
}

inline int Respond(const Population& pop, const StratumId& stratum, Rng& rng) {
  if (stratum.m() != pop.m()) {
    Fail(ErrorCategory::kContract, "stratum width does not match population");
  }
  return Respond(pop, stratum.index(), rng);
}

// Bernoulli standard deviation of the response within X_attr = value:
// sqrt(q (1 - q)), q = P(Y = 1 | X_attr = value).
inline double GroundTruthSigma(const GroundTruth& gt, int attr, int value) {
  const double q = GroupRate(gt, attr, value, WeightMode::kEmpirical);
  return std::sqrt(std::max(0.0, q * (1.0 - q)));
}

}  // namespace fairaudit

#endif  // FAIRAUDIT_DATASET_HPP_
