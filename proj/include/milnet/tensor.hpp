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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "milnet/errors.hpp"

namespace milnet {

/// Dense n-dimensional array of 64-bit floats, row-major.
///
/// The universal value type for features, weights and gradients. Values are
/// treated as immutable once a tensor leaves its constructing function; the
/// arithmetic entry points below check for NaN/Inf and throw NumericError
/// rather than propagate them.
class Tensor {
 public:
  Tensor() = default;

  /// Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<int> dims);

  Tensor(std::vector<int> dims, std::vector<double> data);

  static Tensor zeros(std::vector<int> dims) { return Tensor(std::move(dims)); }
  static Tensor full(std::vector<int> dims, double value);
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.dims_); }

  int rank() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  int dim(int axis) const;
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  double& operator()(int i);
  double operator()(int i) const;
  double& operator()(int i, int j);
  double operator()(int i, int j) const;
  double& operator()(int i, int j, int k);
  double operator()(int i, int j, int k) const;
  double& operator()(int i, int j, int k, int l);
  double operator()(int i, int j, int k, int l) const;

  /// Same data, new shape; element count must match.
  Tensor reshape(std::vector<int> new_dims) const;

  bool same_dims(const Tensor& other) const { return dims_ == other.dims_; }

  /// Human-readable shape, e.g. "[2, 3]".
  std::string dims_str() const;

 private:
  std::vector<int> dims_;
  std::vector<double> data_;
};

/// Standard matrix product of two rank-2 tensors.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor map(const Tensor& a, const std::function<double(double)>& fn);

/// Index of the maximum along `axis`, ties resolved to the lowest index.
/// The result drops that axis; indices are stored as integral doubles.
Tensor argmax_axis(const Tensor& a, int axis);

/// Throws NumericError if any element is NaN or Inf.
void check_finite(const Tensor& t, const char* where);

}  // namespace milnet
