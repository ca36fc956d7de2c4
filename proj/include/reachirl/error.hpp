// Copyright 2026 The reachirl Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace reachirl {

enum class ErrorKind {
  kInvalidArgument,
  kPlanMismatch,
  kShapeMismatch,
  kTooShort,
  kLengthMismatch,
  kInfeasible,
  kNumericalFailure,
  kParseError,
  kSchemaVersionMismatch,
  kNonRigid,
  kManifestIncomplete,
  kDegenerate,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kPlanMismatch: return "PlanMismatch";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kTooShort: return "TooShort";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kInfeasible: return "Infeasible";
    case ErrorKind::kNumericalFailure: return "NumericalFailure";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorKind::kNonRigid: return "NonRigid";
    case ErrorKind::kManifestIncomplete: return "ManifestIncomplete";
    case ErrorKind::kDegenerate: return "Degenerate";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Carries the 1-based location of a malformed input field.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, int column, const std::string& what)
      : Error(ErrorKind::kParseError,
              source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace reachirl
