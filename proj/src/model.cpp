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

#include "milnet/model.hpp"

#include <cmath>

#include "milnet/rng.hpp"

namespace milnet {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::BboxOnly: return "bbox_only";
    case Variant::FullImageOnly: return "full_image_only";
    case Variant::Fusion1: return "fusion1";
    case Variant::Fusion2: return "fusion2";
  }
  throw ConfigError("unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "bbox_only") return Variant::BboxOnly;
  if (name == "full_image_only") return Variant::FullImageOnly;
  if (name == "fusion1") return Variant::Fusion1;
  if (name == "fusion2") return Variant::Fusion2;
  throw ConfigError("unknown model variant '" + name + "'");
}

namespace {

constexpr int kImageChannels = 3;

Tensor he_uniform(std::vector<int> dims, int fan_in, Rng& rng) {
  Tensor t(std::move(dims));
  const double bound = std::sqrt(6.0 / fan_in);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

bool uses_box_roi(Variant v) { return v != Variant::FullImageOnly; }
bool uses_fusion(Variant v) {
  return v == Variant::Fusion1 || v == Variant::Fusion2;
}

}  // namespace

Roi image_box_to_feature_roi(const Roi& box, int stride, int fmap_w,
                             int fmap_h) {
  double x0 = std::floor(box.x0 / stride);
  double y0 = std::floor(box.y0 / stride);
  double x1 = std::ceil(box.x1 / stride);
  double y1 = std::ceil(box.y1 / stride);
  x0 = std::max(0.0, std::min(x0, static_cast<double>(fmap_w)));
  x1 = std::max(0.0, std::min(x1, static_cast<double>(fmap_w)));
  y0 = std::max(0.0, std::min(y0, static_cast<double>(fmap_h)));
  y1 = std::max(0.0, std::min(y1, static_cast<double>(fmap_h)));
  if (x1 <= x0) {
    x0 = std::min(x0, static_cast<double>(fmap_w - 1));
    x1 = x0 + 1;
  }
  if (y1 <= y0) {
    y0 = std::min(y0, static_cast<double>(fmap_h - 1));
    y1 = y0 + 1;
  }
  return {x0, y0, x1, y1};
}

Network Network::build(const ModelConfig& config) {
  if (config.num_classes < 1) {
    throw ConfigError("num_classes must be >= 1");
  }
  if (config.backbone_channels.empty()) {
    throw ConfigError("backbone needs at least one conv stage");
  }
  for (int c : config.backbone_channels) {
    if (c < 1) throw ConfigError("backbone channel counts must be positive");
  }
  if (config.roi_out < 1) {
    throw ConfigError("roi_out must be >= 1");
  }
  if (config.head_hidden.empty()) {
    throw ConfigError("head needs at least one hidden fc layer");
  }
  const int c_back = config.backbone_channels.back();
  if (config.variant == Variant::Fusion2 && c_back % 2 != 0) {
    throw ConfigError("Fusion2 requires an even backbone output channel "
                      "count, got " + std::to_string(c_back));
  }

  Network net;
  net.config_ = config;
  Rng rng(config.seed);

  int c_in = kImageChannels;
  for (std::size_t i = 0; i < config.backbone_channels.size(); ++i) {
    const int c_out = config.backbone_channels[i];
    const std::string name = "backbone.conv" + std::to_string(i + 1);
    net.params_[name + ".w"] = he_uniform({c_out, c_in, 3, 3}, c_in * 9, rng);
    net.params_[name + ".b"] = Tensor({c_out});
    c_in = c_out;
  }

  if (config.variant == Variant::Fusion1) {
    net.params_["fusion.reduce.w"] =
        he_uniform({c_back, 2 * c_back, 1, 1}, 2 * c_back, rng);
    net.params_["fusion.reduce.b"] = Tensor({c_back});
  } else if (config.variant == Variant::Fusion2) {
    net.params_["fusion.reduce_box.w"] =
        he_uniform({c_back / 2, c_back, 1, 1}, c_back, rng);
    net.params_["fusion.reduce_box.b"] = Tensor({c_back / 2});
    net.params_["fusion.reduce_img.w"] =
        he_uniform({c_back / 2, c_back, 1, 1}, c_back, rng);
    net.params_["fusion.reduce_img.b"] = Tensor({c_back / 2});
  }

  int in_dim = c_back * config.roi_out * config.roi_out;
  for (std::size_t i = 0; i < config.head_hidden.size(); ++i) {
    const int out_dim = config.head_hidden[i];
    if (out_dim < 1) throw ConfigError("head widths must be positive");
    const std::string name = "head.fc" + std::to_string(i + 1);
    net.params_[name + ".w"] = he_uniform({out_dim, in_dim}, in_dim, rng);
    net.params_[name + ".b"] = Tensor({out_dim});
    in_dim = out_dim;
  }
  const std::string cls =
      "head.fc" + std::to_string(config.head_hidden.size() + 1);
  net.params_[cls + ".w"] = he_uniform({config.num_classes, in_dim}, in_dim, rng);
  net.params_[cls + ".b"] = Tensor({config.num_classes});
  return net;
}

int Network::backbone_stride() const {
  int s = 1;
  for (std::size_t i = 0; i < config_.backbone_channels.size(); ++i) s *= 2;
  return s;
}

std::vector<std::string> Network::layer_order() const {
  std::vector<std::string> order;
  for (std::size_t i = 0; i < config_.backbone_channels.size(); ++i) {
    order.push_back("backbone.conv" + std::to_string(i + 1));
  }
  if (uses_fusion(config_.variant)) order.push_back("fusion");
  for (std::size_t i = 0; i < config_.head_hidden.size() + 1; ++i) {
    order.push_back("head.fc" + std::to_string(i + 1));
  }
  return order;
}

struct NetworkTrace::InstancePath {
  RoiPoolCtx pool_box;
  RoiPoolCtx pool_img;
  FusionCtx fusion;
  ReluCtx fusion_relu;
  std::vector<FcCtx> fcs;
  std::vector<ReluCtx> head_relus;
};

namespace {

const Tensor& param(const GradMap& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) {
    throw ConfigError("missing parameter '" + name + "'");
  }
  return it->second;
}

}  // namespace

NetworkTrace Network::forward_traced(const Tensor& image,
                                     const std::vector<Roi>& boxes) const {
  if (image.rank() != 3 || image.dim(0) != kImageChannels) {
    throw ShapeError("image must be 3 x H x W, got " + image.dims_str());
  }
  const int img_h = image.dim(1), img_w = image.dim(2);
  const bool need_boxes = uses_box_roi(config_.variant);
  if (need_boxes && boxes.empty()) {
    throw ValidationError("variant " + variant_name(config_.variant) +
                          " needs at least one person box");
  }

  NetworkTrace trace;
  trace.net_ = this;

  // Backbone, shared across instances.
  const std::size_t stages = config_.backbone_channels.size();
  trace.backbone_conv_.resize(stages);
  trace.backbone_relu_.resize(stages);
  Tensor x = image;
  for (std::size_t i = 0; i < stages; ++i) {
    const std::string name = "backbone.conv" + std::to_string(i + 1);
    x = conv2d(x, param(params_, name + ".w"), param(params_, name + ".b"), 2,
               &trace.backbone_conv_[i]);
    x = relu(x, &trace.backbone_relu_[i]);
  }
  const Tensor& fmap = x;
  const int fh = fmap.dim(1), fw = fmap.dim(2);
  const int stride = backbone_stride();
  const Roi full_roi{0.0, 0.0, static_cast<double>(fw), static_cast<double>(fh)};
  const int s = config_.roi_out;

  // Validate and map the boxes up front so errors name image coordinates.
  std::vector<Roi> feature_rois;
  if (need_boxes) {
    feature_rois.reserve(boxes.size());
    for (const Roi& b : boxes) {
      Roi clamped{std::max(0.0, std::min(b.x0, static_cast<double>(img_w))),
                  std::max(0.0, std::min(b.y0, static_cast<double>(img_h))),
                  std::max(0.0, std::min(b.x1, static_cast<double>(img_w))),
                  std::max(0.0, std::min(b.y1, static_cast<double>(img_h)))};
      if (clamped.x1 <= clamped.x0 || clamped.y1 <= clamped.y0) {
        throw ValidationError("person box [" + std::to_string(b.x0) + ", " +
                              std::to_string(b.y0) + ", " + std::to_string(b.x1) +
                              ", " + std::to_string(b.y1) +
                              ") lies outside the image after clamping");
      }
      feature_rois.push_back(image_box_to_feature_roi(clamped, stride, fw, fh));
    }
  }

  const int n = need_boxes ? static_cast<int>(boxes.size()) : 1;
  const int c = config_.num_classes;
  trace.scores_.scores = Tensor({n, c});
  trace.scores_.boxes = need_boxes ? boxes : std::vector<Roi>{};
  trace.instances_.reserve(static_cast<std::size_t>(n));

  FusionParams fusion_params;
  if (config_.variant == Variant::Fusion1) {
    fusion_params.reduce_w = param(params_, "fusion.reduce.w");
    fusion_params.reduce_b = param(params_, "fusion.reduce.b");
  } else if (config_.variant == Variant::Fusion2) {
    fusion_params.box_w = param(params_, "fusion.reduce_box.w");
    fusion_params.box_b = param(params_, "fusion.reduce_box.b");
    fusion_params.img_w = param(params_, "fusion.reduce_img.w");
    fusion_params.img_b = param(params_, "fusion.reduce_img.b");
  }

  for (int i = 0; i < n; ++i) {
    auto path = std::make_shared<NetworkTrace::InstancePath>();
    Tensor feat;
    switch (config_.variant) {
      case Variant::BboxOnly:
        feat = roi_max_pool(fmap, feature_rois[static_cast<std::size_t>(i)], s, s,
                            &path->pool_box);
        break;
      case Variant::FullImageOnly:
        feat = roi_max_pool(fmap, full_roi, s, s, &path->pool_img);
        break;
      case Variant::Fusion1:
      case Variant::Fusion2: {
        Tensor box_feat = roi_max_pool(
            fmap, feature_rois[static_cast<std::size_t>(i)], s, s, &path->pool_box);
        Tensor img_feat = roi_max_pool(fmap, full_roi, s, s, &path->pool_img);
        Tensor fused = fusion_combine(
            config_.variant == Variant::Fusion1 ? FusionVariant::Fusion1
                                                : FusionVariant::Fusion2,
            box_feat, img_feat, fusion_params, &path->fusion);
        feat = relu(fused, &path->fusion_relu);
        break;
      }
    }

    Tensor h = feat.reshape({static_cast<int>(feat.size())});
    const std::size_t n_hidden = config_.head_hidden.size();
    path->fcs.resize(n_hidden + 1);
    path->head_relus.resize(n_hidden);
    for (std::size_t l = 0; l < n_hidden; ++l) {
      const std::string name = "head.fc" + std::to_string(l + 1);
      h = fully_connected(h, param(params_, name + ".w"),
                          param(params_, name + ".b"), &path->fcs[l]);
      h = relu(h, &path->head_relus[l]);
    }
    const std::string cls = "head.fc" + std::to_string(n_hidden + 1);
    Tensor logits = fully_connected(h, param(params_, cls + ".w"),
                                    param(params_, cls + ".b"),
                                    &path->fcs[n_hidden]);
    for (int j = 0; j < c; ++j) trace.scores_.scores(i, j) = logits(j);
    trace.instances_.push_back(std::move(path));
  }
  return trace;
}

GradMap NetworkTrace::backward(const Tensor& grad_logits) const {
  const Network& net = *net_;
  const ModelConfig& cfg = net.config();
  if (grad_logits.rank() != 2 ||
      grad_logits.dim(0) != static_cast<int>(instances_.size()) ||
      grad_logits.dim(1) != cfg.num_classes) {
    throw ShapeError("grad_logits must match the traced instance scores");
  }

  GradMap grads;
  for (const auto& [name, tensor] : net.params()) {
    grads[name] = Tensor::zeros_like(tensor);
  }

  const Tensor& fmap_relu_out =
      backbone_relu_.back().input;  // pre-activation of the last relu
  Tensor dfmap = Tensor::zeros_like(fmap_relu_out);

  FusionParams fusion_params;
  if (cfg.variant == Variant::Fusion1) {
    fusion_params.reduce_w = param(net.params(), "fusion.reduce.w");
    fusion_params.reduce_b = param(net.params(), "fusion.reduce.b");
  } else if (cfg.variant == Variant::Fusion2) {
    fusion_params.box_w = param(net.params(), "fusion.reduce_box.w");
    fusion_params.box_b = param(net.params(), "fusion.reduce_box.b");
    fusion_params.img_w = param(net.params(), "fusion.reduce_img.w");
    fusion_params.img_b = param(net.params(), "fusion.reduce_img.b");
  }

  const std::size_t n_hidden = cfg.head_hidden.size();
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& path = *instances_[i];
    Tensor d({cfg.num_classes});
    for (int j = 0; j < cfg.num_classes; ++j) {
      d(j) = grad_logits(static_cast<int>(i), j);
    }

    // Head, classifier first.
    {
      const std::string cls = "head.fc" + std::to_string(n_hidden + 1);
      FcGrads g = fully_connected_backward(
          path.fcs[n_hidden], param(net.params(), cls + ".w"), d);
      grads[cls + ".w"] = add(grads[cls + ".w"], g.weights);
      grads[cls + ".b"] = add(grads[cls + ".b"], g.bias);
      d = std::move(g.input);
    }
    for (std::size_t l = n_hidden; l-- > 0;) {
      d = relu_backward(path.head_relus[l], d);
      const std::string name = "head.fc" + std::to_string(l + 1);
      FcGrads g = fully_connected_backward(
          path.fcs[l], param(net.params(), name + ".w"), d);
      grads[name + ".w"] = add(grads[name + ".w"], g.weights);
      grads[name + ".b"] = add(grads[name + ".b"], g.bias);
      d = std::move(g.input);
    }

    const int c_back = cfg.backbone_channels.back();
    Tensor dfeat = d.reshape({c_back, cfg.roi_out, cfg.roi_out});

    switch (cfg.variant) {
      case Variant::BboxOnly: {
        Tensor dp = roi_max_pool_backward(path.pool_box, dfeat);
        dfmap = add(dfmap, dp);
        break;
      }
      case Variant::FullImageOnly: {
        Tensor dp = roi_max_pool_backward(path.pool_img, dfeat);
        dfmap = add(dfmap, dp);
        break;
      }
      case Variant::Fusion1:
      case Variant::Fusion2: {
        Tensor dfused = relu_backward(path.fusion_relu, dfeat);
        FusionGrads fg =
            fusion_combine_backward(path.fusion, fusion_params, dfused);
        if (cfg.variant == Variant::Fusion1) {
          grads["fusion.reduce.w"] =
              add(grads["fusion.reduce.w"], fg.params.reduce_w);
          grads["fusion.reduce.b"] =
              add(grads["fusion.reduce.b"], fg.params.reduce_b);
        } else {
          grads["fusion.reduce_box.w"] =
              add(grads["fusion.reduce_box.w"], fg.params.box_w);
          grads["fusion.reduce_box.b"] =
              add(grads["fusion.reduce_box.b"], fg.params.box_b);
          grads["fusion.reduce_img.w"] =
              add(grads["fusion.reduce_img.w"], fg.params.img_w);
          grads["fusion.reduce_img.b"] =
              add(grads["fusion.reduce_img.b"], fg.params.img_b);
        }
        dfmap = add(dfmap, roi_max_pool_backward(path.pool_box, fg.box_feat));
        dfmap = add(dfmap, roi_max_pool_backward(path.pool_img, fg.img_feat));
        break;
      }
    }
  }

  // Backbone, last stage first.
  Tensor d = std::move(dfmap);
  for (std::size_t l = backbone_conv_.size(); l-- > 0;) {
    d = relu_backward(backbone_relu_[l], d);
    const std::string name = "backbone.conv" + std::to_string(l + 1);
    Conv2dGrads g =
        conv2d_backward(backbone_conv_[l], param(net.params(), name + ".w"), d);
    grads[name + ".w"] = add(grads[name + ".w"], g.weights);
    grads[name + ".b"] = add(grads[name + ".b"], g.bias);
    d = std::move(g.input);
  }
  return grads;
}

InstanceScores Network::forward_instances(const Tensor& image,
                                          const std::vector<Roi>& boxes) const {
  return forward_traced(image, boxes).scores();
}

std::vector<InstanceFeatures> Network::forward_features(
    const Tensor& image, const std::vector<Roi>& boxes) const {
  NetworkTrace trace = forward_traced(image, boxes);
  std::vector<InstanceFeatures> out;
  const int n = trace.scores().scores.dim(0);
  const int c = config_.num_classes;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    InstanceFeatures f;
    f.logits = Tensor({c});
    for (int j = 0; j < c; ++j) f.logits(j) = trace.scores().scores(i, j);
    // Hidden feature: input of the classifier fc (the last hidden activation).
    f.hidden = trace.instances_[static_cast<std::size_t>(i)]
                   ->fcs[config_.head_hidden.size()]
                   .input;
    out.push_back(std::move(f));
  }
  return out;
}

Network::Prediction Network::predict_image(const Tensor& image,
                                           const std::vector<Roi>& boxes) const {
  MilAggregate agg = mil_max_aggregate(forward_instances(image, boxes));
  Prediction p;
  p.probs = sigmoid(agg.image_scores);
  p.winners = std::move(agg.argmax_inst);
  return p;
}

std::vector<Network::Attribution> Network::attribute_labels(
    const Tensor& image, const std::vector<Roi>& boxes,
    double threshold) const {
  Prediction p = predict_image(image, boxes);
  std::vector<Attribution> rows;
  for (int j = 0; j < p.probs.dim(0); ++j) {
    if (p.probs(j) >= threshold) {
      rows.push_back({j, p.winners[static_cast<std::size_t>(j)], p.probs(j)});
    }
  }
  return rows;
}

}  // namespace milnet
