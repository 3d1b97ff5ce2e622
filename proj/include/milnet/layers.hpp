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
#include <vector>

#include "milnet/tensor.hpp"

namespace milnet {

/// Region of interest in feature-map coordinates. Fractional corners are
/// allowed; [x0, x1) x [y0, y1) with 0 <= x0 < x1 <= width and likewise in y.
struct Roi {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
};

// ---------------------------------------------------------------------------
// conv2d: direct convolution, same-padding for k > 1, none for k == 1.
// Input C_in x H x W, weights C_out x C_in x k x k, bias C_out.
// Output spatial size is ceil(H / stride) for k > 1; k == 1 requires stride 1
// and keeps the spatial size.
// ---------------------------------------------------------------------------

struct Conv2dCtx {
  Tensor input;
  int stride = 1;
  int pad = 0;
};

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              int stride, Conv2dCtx* ctx = nullptr);

struct Conv2dGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

Conv2dGrads conv2d_backward(const Conv2dCtx& ctx, const Tensor& weights,
                            const Tensor& grad_out);

// ---------------------------------------------------------------------------
// fully_connected: weights (out x in) . input + bias.
// ---------------------------------------------------------------------------

struct FcCtx {
  Tensor input;
};

Tensor fully_connected(const Tensor& input, const Tensor& weights,
                       const Tensor& bias, FcCtx* ctx = nullptr);

struct FcGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

FcGrads fully_connected_backward(const FcCtx& ctx, const Tensor& weights,
                                 const Tensor& grad_out);

// ---------------------------------------------------------------------------
// Elementwise activations.
// ---------------------------------------------------------------------------

struct ReluCtx {
  Tensor input;  // pre-activations
};

Tensor relu(const Tensor& input, ReluCtx* ctx = nullptr);
Tensor relu_backward(const ReluCtx& ctx, const Tensor& grad_out);

struct SigmoidCtx {
  Tensor output;
};

Tensor sigmoid(const Tensor& input, SigmoidCtx* ctx = nullptr);
Tensor sigmoid_backward(const SigmoidCtx& ctx, const Tensor& grad_out);

// ---------------------------------------------------------------------------
// roi_max_pool: adaptive max pooling of an ROI into out_h x out_w bins.
// Bin edges are quantized with floor for the start and ceil for the end; a
// bin left empty by quantization takes the single nearest cell at its clamped
// start. Backward scatters each output gradient to the recorded argmax
// position (lowest flat index wins ties).
// ---------------------------------------------------------------------------

struct RoiPoolCtx {
  std::vector<int> input_dims;       // C, H, W
  std::vector<std::int64_t> argmax;  // flat input index per output cell
};

Tensor roi_max_pool(const Tensor& fmap, const Roi& roi, int out_h, int out_w,
                    RoiPoolCtx* ctx = nullptr);
Tensor roi_max_pool_backward(const RoiPoolCtx& ctx, const Tensor& grad_out);

// ---------------------------------------------------------------------------
// fusion_combine: early fusion of the person-box and full-image ROI features.
// Fusion1 stacks the two C-channel features and reduces 2C -> C with a 1x1
// convolution; Fusion2 reduces each feature C -> C/2 first and stacks the
// results. Both emit C channels at the input spatial size. The combine is
// linear; the surrounding network applies its nonlinearity.
// ---------------------------------------------------------------------------

enum class FusionVariant { Fusion1, Fusion2 };

struct FusionParams {
  // Fusion1: reduce_w (C x 2C x 1 x 1), reduce_b (C).
  Tensor reduce_w;
  Tensor reduce_b;
  // Fusion2: box/img reductions (C/2 x C x 1 x 1 each).
  Tensor box_w;
  Tensor box_b;
  Tensor img_w;
  Tensor img_b;
};

struct FusionCtx {
  FusionVariant variant = FusionVariant::Fusion1;
  int channels = 0;
  Conv2dCtx conv;      // Fusion1
  Conv2dCtx conv_box;  // Fusion2
  Conv2dCtx conv_img;  // Fusion2
};

Tensor fusion_combine(FusionVariant variant, const Tensor& box_feat,
                      const Tensor& img_feat, const FusionParams& params,
                      FusionCtx* ctx = nullptr);

struct FusionGrads {
  Tensor box_feat;
  Tensor img_feat;
  FusionParams params;
};

FusionGrads fusion_combine_backward(const FusionCtx& ctx,
                                    const FusionParams& params,
                                    const Tensor& grad_out);

/// Stacks two C x H x W tensors along the channel axis.
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace milnet
