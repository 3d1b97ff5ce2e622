// Copyright 2026 The milnet authors
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

namespace milnet {

/// Base class for all milnet errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor dimensions (names both operands where possible).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Bad input data: labels out of range, malformed files, invalid boxes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown: NaN/Inf encountered, singular matrices at reg=0.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (model widths, unknown layer names, bad presets).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace milnet
