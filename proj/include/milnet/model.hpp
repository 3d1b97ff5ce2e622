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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "milnet/layers.hpp"
#include "milnet/loss.hpp"
#include "milnet/tensor.hpp"

namespace milnet {

enum class Variant { BboxOnly, FullImageOnly, Fusion1, Fusion2 };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

/// Architecture settings for one network. The backbone is a stack of 3x3
/// stride-2 conv+relu stages; person-box and full-image ROIs are pooled to
/// roi_out x roi_out and combined per the variant before the fc head.
struct ModelConfig {
  Variant variant = Variant::Fusion2;
  int num_classes = 8;
  std::vector<int> backbone_channels{8, 16};
  int roi_out = 3;
  std::vector<int> head_hidden{64};
  std::uint64_t seed = 0;
};

using GradMap = std::map<std::string, Tensor>;

/// Per-instance activations retained for the transfer pipeline: classifier
/// logits and the last hidden fc activation (the fc7-analogue feature).
struct InstanceFeatures {
  Tensor logits;
  Tensor hidden;
};

class NetworkTrace;

/// One model variant: a named parameter store plus the fixed layer graph
/// implied by the config. Immutable during inference; the trainer is the
/// single writer of the parameter map.
class Network {
 public:
  static Network build(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const GradMap& params() const { return params_; }
  GradMap& params() { return params_; }

  /// Product of the backbone stage strides (2 per stage).
  int backbone_stride() const;

  /// Layer names in graph order, used by freeze_below and gradient routing.
  std::vector<std::string> layer_order() const;

  /// Per-instance logits for the image. Fusion and bbox variants need at
  /// least one box; FullImageOnly ignores boxes and emits a single instance.
  InstanceScores forward_instances(const Tensor& image,
                                   const std::vector<Roi>& boxes) const;

  /// Logits plus hidden features per instance (for the QA feature extractor).
  std::vector<InstanceFeatures> forward_features(
      const Tensor& image, const std::vector<Roi>& boxes) const;

  struct Prediction {
    Tensor probs;              // C, sigmoid of the MIL-aggregated scores
    std::vector<int> winners;  // per-class winning instance
  };

  /// MIL-aggregated image prediction with per-class instance attribution.
  Prediction predict_image(const Tensor& image,
                           const std::vector<Roi>& boxes) const;

  /// Labels attributed above the display threshold (default 0.5), as
  /// (class, instance, probability) rows.
  struct Attribution {
    int class_index;
    int instance;
    double prob;
  };
  std::vector<Attribution> attribute_labels(const Tensor& image,
                                            const std::vector<Roi>& boxes,
                                            double threshold = 0.5) const;

  /// Forward pass that retains every layer context for a backward pass.
  NetworkTrace forward_traced(const Tensor& image,
                              const std::vector<Roi>& boxes) const;

 private:
  friend class NetworkTrace;
  Network() = default;

  ModelConfig config_;
  GradMap params_;
};

/// Saved contexts of one traced forward pass; backward() turns per-instance
/// logit gradients into named parameter gradients.
class NetworkTrace {
 public:
  const InstanceScores& scores() const { return scores_; }

  /// grad_logits is N x C, aligned with scores().scores.
  GradMap backward(const Tensor& grad_logits) const;

 private:
  friend class Network;
  struct InstancePath;

  const Network* net_ = nullptr;
  InstanceScores scores_;
  std::vector<Conv2dCtx> backbone_conv_;
  std::vector<ReluCtx> backbone_relu_;
  std::vector<std::shared_ptr<InstancePath>> instances_;
};

/// Maps an image-coordinate box to feature-map coordinates: divide by the
/// cumulative stride, floor the start, ceil the end, clamp, keep >= 1 cell.
Roi image_box_to_feature_roi(const Roi& box, int stride, int fmap_w,
                             int fmap_h);

}  // namespace milnet
