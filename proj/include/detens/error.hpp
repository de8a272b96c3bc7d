/* Copyright 2026 The detens Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace detens {

// Root of every error thrown by the library. The CLI maps all of these to
// exit code 1; usage errors never reach the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document. `line`/`column` are 1-based; `byte` is 0-based.
// For record-level failures (e.g. the 3rd detection record is missing a
// field) `record` carries the record index and line/column stay 0.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte, std::size_t line,
             std::size_t column)
      : Error(what), byte_(byte), line_(line), column_(column) {}

  ParseError(const std::string& what, std::size_t record)
      : Error(what), record_(record), has_record_(true) {}

  std::size_t byte() const { return byte_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  std::size_t record() const { return record_; }
  bool has_record() const { return has_record_; }

 private:
  std::size_t byte_ = 0;
  std::size_t line_ = 0;
  std::size_t column_ = 0;
  std::size_t record_ = 0;
  bool has_record_ = false;
};

// Well-formed input that violates a domain invariant (unknown category,
// negative extent, detection on an undeclared image, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Invalid FusionConfig / EvalConfig / ScenarioConfig or inconsistent
// arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Evaluation is undefined for the given inputs (e.g. no class has ground
// truth).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// A class weight cannot be defined because the class has no instances.
class DegenerateClassError : public Error {
 public:
  explicit DegenerateClassError(std::string class_name)
      : Error("class '" + class_name +
              "' has zero instances; its weight is undefined"),
        class_name_(std::move(class_name)) {}

  const std::string& class_name() const { return class_name_; }

 private:
  std::string class_name_;
};

}  // namespace detens
