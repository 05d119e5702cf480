// Copyright 2026 The hiertype Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HIERTYPE_SRC_TEXT_UTIL_H_
#define HIERTYPE_SRC_TEXT_UTIL_H_

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "hiertype/errors.h"

namespace hiertype::internal {

inline std::string_view trim(std::string_view s) {
  const char *ws = " \t\r\n\f\v";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::ifstream open_input(const std::string &path,
                                std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IOError("cannot open " + path + " for reading");
  return in;
}

inline std::ofstream open_output(const std::string &path,
                                 std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IOError("cannot open " + path + " for writing");
  return out;
}

}  // namespace hiertype::internal

#endif  // HIERTYPE_SRC_TEXT_UTIL_H_
