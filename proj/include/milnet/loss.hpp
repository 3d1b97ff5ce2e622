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

#include <vector>

#include "milnet/layers.hpp"
#include "milnet/tensor.hpp"

namespace milnet {

/// Pre-squash logits for the N person instances of one image, one row per
/// instance, one column per action class.
struct InstanceScores {
  Tensor scores;  // N x C
  std::vector<Roi> boxes;
};

/// Per-class positive/negative multipliers for the weighted loss.
struct LossWeights {
  Tensor w_p;  // C, all > 0
  Tensor w_n;  // C, all > 0

  /// Same weight for every class (the common setting).
  static LossWeights uniform(int num_classes, double w_p, double w_n);
};

/// Multiple-instance aggregation: image score per class is the max over
/// instances, with the winning instance recorded for gradient routing and
/// attribution. Ties go to the lowest instance index.
struct MilAggregate {
  Tensor image_scores;          // C
  std::vector<int> argmax_inst;  // C, winning instance per class
};

MilAggregate mil_max_aggregate(const InstanceScores& inst);

/// Routes a per-class gradient on the image scores back to the winning
/// instances; all other rows receive exactly zero.
Tensor mil_backward(const MilAggregate& agg, int num_instances,
                    const Tensor& grad_image_scores);

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // w.r.t. the function's direct input
};

/// Weighted binary cross-entropy on probabilities in (0, 1). Probabilities
/// are clamped to [eps, 1-eps] with eps = 1e-12 before the logs. Labels must
/// be exactly 0 or 1. The gradient is w.r.t. the probabilities.
LossResult weighted_bce(const Tensor& probs, const Tensor& labels,
                        const LossWeights& w);

/// Same loss fused with the sigmoid squash, evaluated stably in logit space.
/// The gradient is w.r.t. the logits.
LossResult weighted_bce_with_logits(const Tensor& logits, const Tensor& labels,
                                    const LossWeights& w);

/// Single-label negative log softmax likelihood; gradient w.r.t. the logits.
LossResult softmax_ce(const Tensor& logits, int label);

}  // namespace milnet
