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

#ifndef FAIRAUDIT_CSV_HPP_
#define FAIRAUDIT_CSV_HPP_

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/error.hpp"

namespace fairaudit {

// Streaming RFC 4180 reader: quoted fields, doubled quotes, embedded line
// breaks, CRLF or LF record terminators. A UTF-8 BOM before the header is
// skipped.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {
    if (in_.peek() == 0xEF) {
      char bom[3];
      in_.read(bom, 3);
      if (!(static_cast<unsigned char>(bom[0]) == 0xEF &&
            static_cast<unsigned char>(bom[1]) == 0xBB &&
            static_cast<unsigned char>(bom[2]) == 0xBF)) {
        Fail(ErrorCategory::kIngestion, "malformed byte order mark");
      }
    }
  }

  // Reads the next record into `fields`. Returns false at end of input.
  bool Next(std::vector<std::string>& fields) {
    fields.clear();
    if (in_.peek() == std::char_traits<char>::eof()) return false;
    ++line_;
    std::string field;
    bool quoted = false;
    bool after_quote = false;
    for (;;) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) {
        if (quoted) {
          Fail(ErrorCategory::kIngestion,
               "unterminated quoted field at record " + std::to_string(line_));
        }
        fields.push_back(std::move(field));
        return true;
      }
      const char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            quoted = false;
            after_quote = true;
          }
        } else {
          field.push_back(ch);
        }
        continue;
      }
      if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        after_quote = false;
      } else if (ch == '\n' || ch == '\r') {
        if (ch == '\r' && in_.peek() == '\n') in_.get();
        fields.push_back(std::move(field));
        return true;
      } else if (ch == '"' && field.empty() && !after_quote) {
        quoted = true;
      } else {
        if (after_quote) {
          Fail(ErrorCategory::kIngestion,
               "characters after closing quote at record " + std::to_string(line_));
        }
        field.push_back(ch);
      }
    }
  }

  std::size_t record_number() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

inline std::string CsvEscape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void WriteCsvRow(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << CsvEscape(fields[i]);
  }
  out << '\n';
}

// Shortest decimal form that round-trips a double.
inline std::string FormatDouble(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace fairaudit

#endif  // FAIRAUDIT_CSV_HPP_
