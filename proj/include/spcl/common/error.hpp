// Copyright (c) 2026, The SPCL Authors. All rights reserved.
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

namespace spcl {

/// Base of every error raised by the library. `what()` carries a one-line
/// human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or unknown key. `key()` names the offender.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Bad or missing input data (dataset files, corrupt samples).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite activations or losses, and violated numeric preconditions.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatches and other caller contract violations.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint integrity, version or config-hash failures.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace spcl

#define SPCL_CHECK(cond, ExceptionType, msg)  \
  do {                                        \
    if (!(cond)) throw ExceptionType(msg);    \
  } while (0)
