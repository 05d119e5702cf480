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

#ifndef HIERTYPE_ERRORS_H_
#define HIERTYPE_ERRORS_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace hiertype {

// Error categories map onto process exit codes in the command-line tool.
enum class ErrorCategory {
  kUsage = 2,     // bad flags, inconsistent configuration
  kData = 3,      // malformed or inconsistent input data
  kInternal = 4,  // violated internal invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string &what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string &what)
      : Error(ErrorCategory::kData, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string &what)
      : Error(ErrorCategory::kUsage, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string &what)
      : Error(ErrorCategory::kInternal, what) {}
};

// Raised when an IS-A edge would close a cycle. The path lists concept names
// starting and ending at the same concept.
class CycleError : public DataError {
 public:
  CycleError(const std::string &what, std::vector<std::string> path)
      : DataError(what), path_(std::move(path)) {}

  const std::vector<std::string> &path() const { return path_; }

 private:
  std::vector<std::string> path_;
};

class UnknownConcept : public DataError {
 public:
  using DataError::DataError;
};

class DuplicateEdge : public DataError {
 public:
  using DataError::DataError;
};

class Degenerate : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string &what, size_t line)
      : DataError(what), line_(line) {}

  size_t line() const { return line_; }

 private:
  size_t line_;
};

class SpanError : public DataError {
 public:
  using DataError::DataError;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

class IOError : public DataError {
 public:
  using DataError::DataError;
};

class GoldMissing : public DataError {
 public:
  using DataError::DataError;
};

class EmptyMask : public DataError {
 public:
  using DataError::DataError;
};

class LengthMismatch : public DataError {
 public:
  using DataError::DataError;
};

class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

class ShapeError : public InternalError {
 public:
  using InternalError::InternalError;
};

}  // namespace hiertype

#endif  // HIERTYPE_ERRORS_H_
