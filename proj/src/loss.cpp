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

#include "milnet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace milnet {

namespace {

constexpr double kProbEps = 1e-12;

void require_binary_labels(const Tensor& labels) {
  for (std::int64_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw ValidationError("labels must be exactly 0 or 1, got " +
                            std::to_string(labels[i]) + " at index " +
                            std::to_string(i));
    }
  }
}

void require_weights(const LossWeights& w, int c) {
  if (w.w_p.rank() != 1 || w.w_n.rank() != 1 || w.w_p.dim(0) != c ||
      w.w_n.dim(0) != c) {
    throw ShapeError("loss weights must be length-" + std::to_string(c) +
                     " vectors");
  }
  for (int i = 0; i < c; ++i) {
    if (w.w_p(i) <= 0.0 || w.w_n(i) <= 0.0) {
      throw ValidationError("loss weights must be positive");
    }
  }
}

// log(1 + e^t) without overflow on either side.
double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

}  // namespace

LossWeights LossWeights::uniform(int num_classes, double w_p, double w_n) {
  return {Tensor::full({num_classes}, w_p), Tensor::full({num_classes}, w_n)};
}

MilAggregate mil_max_aggregate(const InstanceScores& inst) {
  if (inst.scores.rank() != 2) {
    throw ShapeError("instance scores must be N x C, got " +
                     inst.scores.dims_str());
  }
  const int n = inst.scores.dim(0), c = inst.scores.dim(1);
  if (n < 1) {
    throw ValidationError("MIL aggregation needs at least one instance");
  }
  MilAggregate agg;
  agg.image_scores = Tensor({c});
  agg.argmax_inst.assign(static_cast<std::size_t>(c), 0);
  for (int j = 0; j < c; ++j) {
    double best = inst.scores(0, j);
    int best_n = 0;
    for (int i = 1; i < n; ++i) {
      const double v = inst.scores(i, j);
      if (v > best) {
        best = v;
        best_n = i;
      }
    }
    agg.image_scores(j) = best;
    agg.argmax_inst[static_cast<std::size_t>(j)] = best_n;
  }
  return agg;
}

Tensor mil_backward(const MilAggregate& agg, int num_instances,
                    const Tensor& grad_image_scores) {
  const int c = grad_image_scores.dim(0);
  Tensor g({num_instances, c});
  for (int j = 0; j < c; ++j) {
    g(agg.argmax_inst[static_cast<std::size_t>(j)], j) = grad_image_scores(j);
  }
  return g;
}

LossResult weighted_bce(const Tensor& probs, const Tensor& labels,
                        const LossWeights& w) {
  if (!probs.same_dims(labels)) {
    throw ShapeError("probs " + probs.dims_str() + " vs labels " +
                     labels.dims_str());
  }
  require_binary_labels(labels);
  const int c = probs.dim(0);
  require_weights(w, c);

  LossResult r;
  r.grad = Tensor({c});
  for (int i = 0; i < c; ++i) {
    const double y = labels(i);
    const double p = std::clamp(probs(i), kProbEps, 1.0 - kProbEps);
    r.loss -= w.w_p(i) * y * std::log(p) + w.w_n(i) * (1.0 - y) * std::log(1.0 - p);
    r.grad(i) = -w.w_p(i) * y / p + w.w_n(i) * (1.0 - y) / (1.0 - p);
  }
  return r;
}

LossResult weighted_bce_with_logits(const Tensor& logits, const Tensor& labels,
                                    const LossWeights& w) {
  if (!logits.same_dims(labels)) {
    throw ShapeError("logits " + logits.dims_str() + " vs labels " +
                     labels.dims_str());
  }
  require_binary_labels(labels);
  const int c = logits.dim(0);
  require_weights(w, c);

  LossResult r;
  r.grad = Tensor({c});
  for (int i = 0; i < c; ++i) {
    const double y = labels(i);
    const double x = logits(i);
    // -log sigmoid(x) = softplus(-x), -log(1 - sigmoid(x)) = softplus(x)
    r.loss += w.w_p(i) * y * softplus(-x) + w.w_n(i) * (1.0 - y) * softplus(x);
    const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                              : std::exp(x) / (1.0 + std::exp(x));
    r.grad(i) = -w.w_p(i) * y * (1.0 - s) + w.w_n(i) * (1.0 - y) * s;
  }
  if (!std::isfinite(r.loss)) {
    throw NumericError("weighted_bce_with_logits produced a non-finite loss");
  }
  return r;
}

LossResult softmax_ce(const Tensor& logits, int label) {
  if (logits.rank() != 1 || logits.dim(0) < 2) {
    throw ShapeError("softmax_ce needs a logit vector of length >= 2, got " +
                     logits.dims_str());
  }
  const int c = logits.dim(0);
  if (label < 0 || label >= c) {
    throw ValidationError("softmax_ce label " + std::to_string(label) +
                          " out of range for " + std::to_string(c) + " classes");
  }
  double m = logits(0);
  for (int i = 1; i < c; ++i) m = std::max(m, logits(i));
  double z = 0.0;
  for (int i = 0; i < c; ++i) z += std::exp(logits(i) - m);
  const double lse = m + std::log(z);

  LossResult r;
  r.loss = lse - logits(label);
  r.grad = Tensor({c});
  for (int i = 0; i < c; ++i) {
    r.grad(i) = std::exp(logits(i) - lse) - (i == label ? 1.0 : 0.0);
  }
  return r;
}

}  // namespace milnet
