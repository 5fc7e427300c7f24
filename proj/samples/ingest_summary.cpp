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

// Ingests a dataset and prints each attribute's marginal and demographic
// parity.
//
//   sample_ingest_summary data/compas-scores-two-years.csv data/schemas/propublica.json

#include <cstdio>
#include <iostream>

#include "fairaudit.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: " << argv[0] << " DATA.csv SCHEMA.json\n";
    return 2;
  }
  try {
    const fairaudit::Dataset ds =
        fairaudit::IngestFile(argv[1], fairaudit::DatasetSchema::Load(argv[2]));
    const fairaudit::Population pop = fairaudit::Population::FromDataset(ds);
    const fairaudit::GroundTruth& gt = pop.ground_truth();
    std::printf("%zu rows, %zu of %zu strata populated\n", pop.num_rows(), gt.num_nonempty(),
                gt.num_strata());
    for (int i = 0; i < gt.m; ++i) {
      const auto u = static_cast<std::size_t>(i);
      std::printf("%-20s P=%.3f  D=%+.4f\n", pop.attribute_names()[u].c_str(),
                  gt.attr_marginal[u], gt.true_dp[u]);
    }
  } catch (const fairaudit::Error& e) {
    std::cerr << e.what() << '\n';
    return e.exit_code();
  }
  return 0;
}
