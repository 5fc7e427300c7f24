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

// Closed-form average errors of the nine sampling/collaboration pairs on a
// synthetic instance, for a range of agent counts.
//
//   sample_closed_form_table [marginal] [R]

#include <cstdio>
#include <cstdlib>

#include "fairaudit.hpp"

int main(int argc, char** argv) {
  const double marginal = argc > 1 ? std::atof(argv[1]) : 0.8;
  const long budget = argc > 2 ? std::atol(argv[2]) : 250;
  const fairaudit::SyntheticTemplate t{marginal, 0.3, 0.6};
  std::printf("%3s", "m");
  for (auto method : fairaudit::kAllMethods) {
    for (auto strategy : fairaudit::kAllStrategies) {
      std::printf(" %10.10s", (fairaudit::MethodName(method).substr(0, 4) + "/" +
                               fairaudit::StrategyName(strategy).substr(0, 5))
                                  .c_str());
    }
  }
  std::printf("\n");
  try {
    for (const auto& row : fairaudit::AsymptoticScan(t, 1, 10, budget)) {
      std::printf("%3d", row.m);
      for (auto method : fairaudit::kAllMethods) {
        for (auto strategy : fairaudit::kAllStrategies) {
          std::printf(" %10.5f", row.at(method, strategy));
        }
      }
      std::printf("\n");
    }
  } catch (const fairaudit::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return e.exit_code();
  }
  return 0;
}
