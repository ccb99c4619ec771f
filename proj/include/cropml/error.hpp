// Copyright 2026 The cropml Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cropml {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix lengths disagree.
class InputShapeError : public Error {
 public:
  using Error::Error;
};

/// An operation received an empty batch, dataset or vector.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is outside its documented domain.
class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

/// A ratio whose denominator is zero (all-zero targets, zero-mean targets).
class UndefinedDenominatorError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error("diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// CSV header does not carry the documented columns.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// One CSV row failed to parse or violates a record invariant.
class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A year range selected no records.
class SplitError : public Error {
 public:
  using Error::Error;
};

/// Min-max scaling is undefined for a column with min == max.
class ConstantColumnError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cropml
