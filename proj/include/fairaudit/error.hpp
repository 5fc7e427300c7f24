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

#ifndef FAIRAUDIT_ERROR_HPP_
#define FAIRAUDIT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairaudit {

// Broad failure classes. The CLI maps each to a distinct exit code.
enum class ErrorCategory {
  kConfiguration = 2,
  kSchema = 3,
  kIngestion = 4,
  kOracle = 5,
  kAllocation = 6,
  kOptimizer = 7,
  kEstimation = 8,
  kDomain = 9,
  kContract = 10,
  kIo = 11,
};

inline std::string_view CategoryName(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kConfiguration: return "configuration";
    case ErrorCategory::kSchema: return "schema";
    case ErrorCategory::kIngestion: return "ingestion";
    case ErrorCategory::kOracle: return "oracle";
    case ErrorCategory::kAllocation: return "allocation";
    case ErrorCategory::kOptimizer: return "optimizer";
    case ErrorCategory::kEstimation: return "estimation";
    case ErrorCategory::kDomain: return "domain";
    case ErrorCategory::kContract: return "contract";
    case ErrorCategory::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(std::string(CategoryName(category)) + " error: " +
                           message),
        category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void Fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace fairaudit

#endif  // FAIRAUDIT_ERROR_HPP_
