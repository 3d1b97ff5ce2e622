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

#include "milnet/tensor.hpp"

#include <cmath>
#include <sstream>

namespace milnet {

namespace {

std::int64_t checked_count(const std::vector<int>& dims) {
  std::int64_t n = 1;
  for (int d : dims) {
    if (d <= 0) {
      throw ShapeError("tensor axis sizes must be positive, got " +
                       std::to_string(d));
    }
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> dims)
    : dims_(std::move(dims)),
      data_(static_cast<std::size_t>(checked_count(dims_)), 0.0) {}

Tensor::Tensor(std::vector<int> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (checked_count(dims_) != static_cast<std::int64_t>(data_.size())) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + dims_str());
  }
}

Tensor Tensor::full(std::vector<int> dims, double value) {
  Tensor t(std::move(dims));
  for (double& v : t.data_) v = value;
  return t;
}

int Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     dims_str());
  }
  return dims_[static_cast<std::size_t>(axis)];
}

double& Tensor::operator()(int i) { return data_[static_cast<std::size_t>(i)]; }
double Tensor::operator()(int i) const { return data_[static_cast<std::size_t>(i)]; }

double& Tensor::operator()(int i, int j) {
  return data_[static_cast<std::size_t>(i) * dims_[1] + j];
}
double Tensor::operator()(int i, int j) const {
  return data_[static_cast<std::size_t>(i) * dims_[1] + j];
}

double& Tensor::operator()(int i, int j, int k) {
  return data_[(static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k];
}
double Tensor::operator()(int i, int j, int k) const {
  return data_[(static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k];
}

double& Tensor::operator()(int i, int j, int k, int l) {
  return data_[((static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k) *
                   dims_[3] + l];
}
double Tensor::operator()(int i, int j, int k, int l) const {
  return data_[((static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k) *
                   dims_[3] + l];
}

Tensor Tensor::reshape(std::vector<int> new_dims) const {
  if (checked_count(new_dims) != size()) {
    Tensor probe;
    probe.dims_ = new_dims;
    throw ShapeError("cannot reshape " + dims_str() + " to " + probe.dims_str());
  }
  Tensor t;
  t.dims_ = std::move(new_dims);
  t.data_ = data_;
  return t;
}

std::string Tensor::dims_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << ", ";
    os << dims_[i];
  }
  os << ']';
  return os.str();
}

void check_finite(const Tensor& t, const char* where) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(where) + " produced a non-finite value");
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul expects rank-2 operands, got " + a.dims_str() +
                     " and " + b.dims_str());
  }
  if (a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul inner dimensions differ: " + a.dims_str() +
                     " vs " + b.dims_str());
  }
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double av = a(i, p);
      for (int j = 0; j < n; ++j) {
        out(i, j) += av * b(p, j);
      }
    }
  }
  check_finite(out, "matmul");
  return out;
}

namespace {

void require_same_dims(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_dims(b)) {
    throw ShapeError(std::string(op) + " requires equal shapes, got " +
                     a.dims_str() + " and " + b.dims_str());
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_dims(a, b, "add");
  Tensor out = a;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] += b[i];
  check_finite(out, "add");
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_dims(a, b, "sub");
  Tensor out = a;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  check_finite(out, "sub");
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_dims(a, b, "mul");
  Tensor out = a;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  check_finite(out, "mul");
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = a;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] *= factor;
  check_finite(out, "scale");
  return out;
}

Tensor map(const Tensor& a, const std::function<double(double)>& fn) {
  Tensor out = a;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = fn(out[i]);
  check_finite(out, "map");
  return out;
}

Tensor argmax_axis(const Tensor& a, int axis) {
  if (axis < 0 || axis >= a.rank()) {
    throw ShapeError("argmax axis " + std::to_string(axis) +
                     " out of range for " + a.dims_str());
  }
  const auto& dims = a.dims();
  std::vector<int> out_dims;
  for (int i = 0; i < a.rank(); ++i) {
    if (i != axis) out_dims.push_back(dims[static_cast<std::size_t>(i)]);
  }
  // Row-major strides: outer runs over axes before `axis`, inner after.
  std::int64_t inner = 1;
  for (int i = axis + 1; i < a.rank(); ++i) inner *= dims[static_cast<std::size_t>(i)];
  std::int64_t outer = 1;
  for (int i = 0; i < axis; ++i) outer *= dims[static_cast<std::size_t>(i)];
  const std::int64_t len = dims[static_cast<std::size_t>(axis)];

  Tensor out(out_dims, std::vector<double>(static_cast<std::size_t>(outer * inner), 0.0));
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t in = 0; in < inner; ++in) {
      std::int64_t base = o * len * inner + in;
      double best = a[base];
      std::int64_t best_idx = 0;
      for (std::int64_t j = 1; j < len; ++j) {
        double v = a[base + j * inner];
        if (v > best) {
          best = v;
          best_idx = j;
        }
      }
      out[o * inner + in] = static_cast<double>(best_idx);
    }
  }
  return out;
}

}  // namespace milnet
