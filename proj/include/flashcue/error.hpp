// Copyright 2026 The flashcue Authors. All Rights Reserved.
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

namespace flashcue {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid levels, exposures, gains or other inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Inputs that are well-formed but unusable (dimension mismatch, missing files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data. Carries the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// An estimator wiring or interface contract was violated.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// An external stage failed (nonzero exit, timeout, unreadable output).
class StageFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace flashcue
