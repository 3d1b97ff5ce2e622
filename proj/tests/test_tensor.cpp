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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "milnet/rng.hpp"
#include "milnet/tensor.hpp"

using namespace milnet;

namespace {

Tensor random_tensor(std::vector<int> dims, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(dims));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Independent oracle: plain triple loop, no blocking or reordering.
Tensor matmul_naive(const Tensor& a, const Tensor& b) {
  Tensor out({a.dim(0), b.dim(1)});
  for (int i = 0; i < a.dim(0); ++i) {
    for (int j = 0; j < b.dim(1); ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.dim(1); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("tensor");

TEST_CASE("matmul identity") {
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor m({2, 2}, {1, 2, 3, 4});
  Tensor out = matmul(eye, m);
  for (std::int64_t i = 0; i < 4; ++i) CHECK(out[i] == m[i]);
}

TEST_CASE("matmul 1x2 times 2x1") {
  Tensor a({1, 2}, {1, 2});
  Tensor b({2, 1}, {3, 4});
  Tensor out = matmul(a, b);
  CHECK(out.dims() == std::vector<int>{1, 1});
  CHECK(out[0] == doctest::Approx(11.0).epsilon(1e-15));
}

TEST_CASE("matmul matches the naive triple loop") {
  Rng rng(11);
  Tensor a = random_tensor({5, 7}, rng);
  Tensor b = random_tensor({7, 3}, rng);
  Tensor got = matmul(a, b);
  Tensor want = matmul_naive(a, b);
  for (std::int64_t i = 0; i < got.size(); ++i) {
    CHECK(std::abs(got[i] - want[i]) <= 1e-12);
  }
}

TEST_CASE("matmul shape errors name both operands") {
  Tensor a({2, 3});
  Tensor b({4, 2});
  CHECK_THROWS_WITH_AS(matmul(a, b),
                       doctest::Contains("[2, 3]"), ShapeError);
  CHECK_THROWS_WITH_AS(matmul(a, b),
                       doctest::Contains("[4, 2]"), ShapeError);
}

TEST_CASE("ewise identities") {
  Rng rng(12);
  Tensor x = random_tensor({3, 4}, rng);
  Tensor same = add(x, Tensor::zeros_like(x));
  for (std::int64_t i = 0; i < x.size(); ++i) CHECK(same[i] == x[i]);
  Tensor zeroed = scale(x, 0.0);
  for (std::int64_t i = 0; i < x.size(); ++i) CHECK(zeroed[i] == 0.0);
}

TEST_CASE("ewise mul matches a scalar loop") {
  Rng rng(13);
  Tensor a = random_tensor({2, 5}, rng);
  Tensor b = random_tensor({2, 5}, rng);
  Tensor got = mul(a, b);
  for (std::int64_t i = 0; i < a.size(); ++i) CHECK(got[i] == a[i] * b[i]);
}

TEST_CASE("ewise rejects shape mismatch") {
  CHECK_THROWS_AS(add(Tensor({2, 2}), Tensor({4})), ShapeError);
  CHECK_THROWS_AS(mul(Tensor({2, 2}), Tensor({2, 3})), ShapeError);
}

TEST_CASE("non-finite results are surfaced, not propagated") {
  Tensor x({2}, {1.0, 2.0});
  CHECK_THROWS_AS(scale(x, std::numeric_limits<double>::infinity()),
                  NumericError);
  CHECK_THROWS_AS(map(x, [](double) { return std::nan(""); }), NumericError);
}

TEST_CASE("argmax basics and tie rule") {
  Tensor v({3}, {0.2, 1.5, -0.3});
  CHECK(argmax_axis(v, 0)[0] == 1.0);

  Tensor tie({2}, {3.0, 3.0});
  CHECK(argmax_axis(tie, 0)[0] == 0.0);  // lowest index wins
}

TEST_CASE("argmax matches a linear scan on random vectors") {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor v = random_tensor({17}, rng);
    int best = 0;
    for (int i = 1; i < 17; ++i) {
      if (v(i) > v(best)) best = i;
    }
    CHECK(argmax_axis(v, 0)[0] == static_cast<double>(best));
  }
}

TEST_CASE("argmax along a middle axis") {
  // 2x3x2: maximum over axis 1 per (outer, inner) pair.
  Tensor t({2, 3, 2}, {1, 9,  5, 2,  3, 4,
                       7, 0,  6, 8,  2, 1});
  Tensor idx = argmax_axis(t, 1);
  CHECK(idx.dims() == std::vector<int>{2, 2});
  CHECK(idx(0, 0) == 1.0);  // 1, 5, 3 -> 5
  CHECK(idx(0, 1) == 0.0);  // 9, 2, 4 -> 9
  CHECK(idx(1, 0) == 0.0);  // 7, 6, 2 -> 7
  CHECK(idx(1, 1) == 1.0);  // 0, 8, 1 -> 8
}

TEST_CASE("reshape round-trips row-major layout") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = random_tensor({4, 3, 2}, rng);
    Tensor back = x.reshape({6, 4}).reshape({4, 3, 2});
    CHECK(back.dims() == x.dims());
    for (std::int64_t i = 0; i < x.size(); ++i) CHECK(back[i] == x[i]);
  }
  CHECK_THROWS_AS(Tensor({2, 3}).reshape({4}), ShapeError);
}

TEST_CASE("matmul associativity on random triples") {
  Rng rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor a = random_tensor({4, 6}, rng);
    Tensor b = random_tensor({6, 5}, rng);
    Tensor c = random_tensor({5, 3}, rng);
    Tensor left = matmul(matmul(a, b), c);
    Tensor right = matmul(a, matmul(b, c));
    for (std::int64_t i = 0; i < left.size(); ++i) {
      double denom = std::max({std::abs(left[i]), std::abs(right[i]), 1.0});
      CHECK(std::abs(left[i] - right[i]) / denom <= 1e-9);
    }
  }
}

TEST_SUITE_END();
