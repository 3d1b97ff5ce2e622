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

#include "milnet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace milnet {

namespace {

void require_rank(const Tensor& t, int rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + " expects rank " +
                     std::to_string(rank) + ", got " + t.dims_str());
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              int stride, Conv2dCtx* ctx) {
  require_rank(input, 3, "conv2d input");
  require_rank(weights, 4, "conv2d weights");
  require_rank(bias, 1, "conv2d bias");
  const int c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int c_out = weights.dim(0), k = weights.dim(3);
  if (weights.dim(1) != c_in) {
    throw ShapeError("conv2d channel mismatch: input " + input.dims_str() +
                     " vs weights " + weights.dims_str());
  }
  if (weights.dim(2) != k) {
    throw ShapeError("conv2d kernel must be square, got " + weights.dims_str());
  }
  if (bias.dim(0) != c_out) {
    throw ShapeError("conv2d bias length " + bias.dims_str() +
                     " does not match " + std::to_string(c_out) + " filters");
  }
  if (k % 2 == 0) {
    throw ShapeError("conv2d kernel size must be odd, got " + std::to_string(k));
  }
  if (stride < 1) {
    throw ShapeError("conv2d stride must be >= 1");
  }
  if (k == 1 && stride != 1) {
    throw ShapeError("1x1 conv2d requires stride 1");
  }
  if (h < k || w < k) {
    throw ShapeError("conv2d input " + input.dims_str() +
                     " smaller than kernel " + std::to_string(k));
  }

  const int pad = (k == 1) ? 0 : (k - 1) / 2;
  const int out_h = (h + 2 * pad - k) / stride + 1;
  const int out_w = (w + 2 * pad - k) / stride + 1;

  Tensor out({c_out, out_h, out_w});
  for (int co = 0; co < c_out; ++co) {
    const double b = bias(co);
    for (int oy = 0; oy < out_h; ++oy) {
      for (int ox = 0; ox < out_w; ++ox) {
        double acc = b;
        for (int ci = 0; ci < c_in; ++ci) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= w) continue;
              acc += input(ci, iy, ix) * weights(co, ci, ky, kx);
            }
          }
        }
        out(co, oy, ox) = acc;
      }
    }
  }
  check_finite(out, "conv2d");
  if (ctx) {
    ctx->input = input;
    ctx->stride = stride;
    ctx->pad = pad;
  }
  return out;
}

Conv2dGrads conv2d_backward(const Conv2dCtx& ctx, const Tensor& weights,
                            const Tensor& grad_out) {
  const Tensor& input = ctx.input;
  const int c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int c_out = weights.dim(0), k = weights.dim(3);
  const int stride = ctx.stride, pad = ctx.pad;
  const int out_h = grad_out.dim(1), out_w = grad_out.dim(2);

  Conv2dGrads g;
  g.input = Tensor::zeros_like(input);
  g.weights = Tensor::zeros_like(weights);
  g.bias = Tensor({c_out});
  for (int co = 0; co < c_out; ++co) {
    for (int oy = 0; oy < out_h; ++oy) {
      for (int ox = 0; ox < out_w; ++ox) {
        const double go = grad_out(co, oy, ox);
        g.bias(co) += go;
        for (int ci = 0; ci < c_in; ++ci) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= w) continue;
              g.input(ci, iy, ix) += go * weights(co, ci, ky, kx);
              g.weights(co, ci, ky, kx) += go * input(ci, iy, ix);
            }
          }
        }
      }
    }
  }
  return g;
}

Tensor fully_connected(const Tensor& input, const Tensor& weights,
                       const Tensor& bias, FcCtx* ctx) {
  require_rank(input, 1, "fully_connected input");
  require_rank(weights, 2, "fully_connected weights");
  require_rank(bias, 1, "fully_connected bias");
  const int out_dim = weights.dim(0), in_dim = weights.dim(1);
  if (input.dim(0) != in_dim) {
    throw ShapeError("fully_connected input " + input.dims_str() +
                     " does not match weights " + weights.dims_str());
  }
  if (bias.dim(0) != out_dim) {
    throw ShapeError("fully_connected bias " + bias.dims_str() +
                     " does not match weights " + weights.dims_str());
  }
  Tensor out({out_dim});
  for (int o = 0; o < out_dim; ++o) {
    double acc = bias(o);
    for (int i = 0; i < in_dim; ++i) acc += weights(o, i) * input(i);
    out(o) = acc;
  }
  check_finite(out, "fully_connected");
  if (ctx) ctx->input = input;
  return out;
}

FcGrads fully_connected_backward(const FcCtx& ctx, const Tensor& weights,
                                 const Tensor& grad_out) {
  const int out_dim = weights.dim(0), in_dim = weights.dim(1);
  FcGrads g;
  g.input = Tensor({in_dim});
  g.weights = Tensor::zeros_like(weights);
  g.bias = grad_out;
  for (int o = 0; o < out_dim; ++o) {
    const double go = grad_out(o);
    for (int i = 0; i < in_dim; ++i) {
      g.input(i) += go * weights(o, i);
      g.weights(o, i) = go * ctx.input(i);
    }
  }
  return g;
}

Tensor relu(const Tensor& input, ReluCtx* ctx) {
  Tensor out = input;
  for (std::int64_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) out[i] = 0.0;
  }
  check_finite(out, "relu");
  if (ctx) ctx->input = input;
  return out;
}

Tensor relu_backward(const ReluCtx& ctx, const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    if (ctx.input[i] <= 0.0) g[i] = 0.0;
  }
  return g;
}

Tensor sigmoid(const Tensor& input, SigmoidCtx* ctx) {
  Tensor out = input;
  for (std::int64_t i = 0; i < out.size(); ++i) {
    const double x = out[i];
    // Branch keeps exp() off the overflow side for large |x|.
    out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                      : std::exp(x) / (1.0 + std::exp(x));
  }
  check_finite(out, "sigmoid");
  if (ctx) ctx->output = out;
  return out;
}

Tensor sigmoid_backward(const SigmoidCtx& ctx, const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const double y = ctx.output[i];
    g[i] *= y * (1.0 - y);
  }
  return g;
}

Tensor roi_max_pool(const Tensor& fmap, const Roi& roi, int out_h, int out_w,
                    RoiPoolCtx* ctx) {
  require_rank(fmap, 3, "roi_max_pool input");
  const int c = fmap.dim(0), h = fmap.dim(1), w = fmap.dim(2);
  if (out_h < 1 || out_w < 1) {
    throw ShapeError("roi_max_pool output size must be >= 1");
  }
  if (!(roi.x0 >= 0.0 && roi.x0 < roi.x1 && roi.x1 <= w &&
        roi.y0 >= 0.0 && roi.y0 < roi.y1 && roi.y1 <= h)) {
    throw ValidationError("roi [" + std::to_string(roi.x0) + ", " +
                          std::to_string(roi.y0) + ", " + std::to_string(roi.x1) +
                          ", " + std::to_string(roi.y1) +
                          ") is degenerate or outside the " + fmap.dims_str() +
                          " feature map");
  }

  const double bin_h = (roi.y1 - roi.y0) / out_h;
  const double bin_w = (roi.x1 - roi.x0) / out_w;

  // Integer bin extents, shared across channels.
  std::vector<int> ys(static_cast<std::size_t>(out_h)), ye(static_cast<std::size_t>(out_h));
  std::vector<int> xs(static_cast<std::size_t>(out_w)), xe(static_cast<std::size_t>(out_w));
  for (int i = 0; i < out_h; ++i) {
    int s = static_cast<int>(std::floor(roi.y0 + i * bin_h));
    int e = static_cast<int>(std::ceil(roi.y0 + (i + 1) * bin_h));
    s = std::clamp(s, 0, h);
    e = std::clamp(e, 0, h);
    if (e <= s) {  // empty after quantization: nearest cell at the bin start
      s = std::clamp(s, 0, h - 1);
      e = s + 1;
    }
    ys[static_cast<std::size_t>(i)] = s;
    ye[static_cast<std::size_t>(i)] = e;
  }
  for (int j = 0; j < out_w; ++j) {
    int s = static_cast<int>(std::floor(roi.x0 + j * bin_w));
    int e = static_cast<int>(std::ceil(roi.x0 + (j + 1) * bin_w));
    s = std::clamp(s, 0, w);
    e = std::clamp(e, 0, w);
    if (e <= s) {
      s = std::clamp(s, 0, w - 1);
      e = s + 1;
    }
    xs[static_cast<std::size_t>(j)] = s;
    xe[static_cast<std::size_t>(j)] = e;
  }

  Tensor out({c, out_h, out_w});
  std::vector<std::int64_t> argmax(static_cast<std::size_t>(c) * out_h * out_w);
  for (int ch = 0; ch < c; ++ch) {
    for (int i = 0; i < out_h; ++i) {
      for (int j = 0; j < out_w; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        std::int64_t best_idx = -1;
        for (int y = ys[static_cast<std::size_t>(i)]; y < ye[static_cast<std::size_t>(i)]; ++y) {
          for (int x = xs[static_cast<std::size_t>(j)]; x < xe[static_cast<std::size_t>(j)]; ++x) {
            const std::int64_t idx =
                (static_cast<std::int64_t>(ch) * h + y) * w + x;
            const double v = fmap[idx];
            if (v > best) {  // strict: first maximum keeps the lowest index
              best = v;
              best_idx = idx;
            }
          }
        }
        out(ch, i, j) = best;
        argmax[(static_cast<std::size_t>(ch) * out_h + i) * out_w + j] = best_idx;
      }
    }
  }
  check_finite(out, "roi_max_pool");
  if (ctx) {
    ctx->input_dims = {c, h, w};
    ctx->argmax = std::move(argmax);
  }
  return out;
}

Tensor roi_max_pool_backward(const RoiPoolCtx& ctx, const Tensor& grad_out) {
  Tensor g({ctx.input_dims[0], ctx.input_dims[1], ctx.input_dims[2]});
  for (std::int64_t i = 0; i < grad_out.size(); ++i) {
    g[ctx.argmax[static_cast<std::size_t>(i)]] += grad_out[i];
  }
  return g;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "concat_channels");
  require_rank(b, 3, "concat_channels");
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw ShapeError("concat_channels spatial sizes differ: " + a.dims_str() +
                     " vs " + b.dims_str());
  }
  Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
  std::copy(a.data(), a.data() + a.size(), out.data());
  std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
  return out;
}

namespace {

std::pair<Tensor, Tensor> split_channels(const Tensor& t, int first) {
  Tensor a({first, t.dim(1), t.dim(2)});
  Tensor b({t.dim(0) - first, t.dim(1), t.dim(2)});
  std::copy(t.data(), t.data() + a.size(), a.data());
  std::copy(t.data() + a.size(), t.data() + t.size(), b.data());
  return {std::move(a), std::move(b)};
}

}  // namespace

Tensor fusion_combine(FusionVariant variant, const Tensor& box_feat,
                      const Tensor& img_feat, const FusionParams& params,
                      FusionCtx* ctx) {
  require_rank(box_feat, 3, "fusion_combine box feature");
  require_rank(img_feat, 3, "fusion_combine image feature");
  if (!box_feat.same_dims(img_feat)) {
    throw ShapeError("fusion_combine features differ: " + box_feat.dims_str() +
                     " vs " + img_feat.dims_str());
  }
  const int c = box_feat.dim(0);
  if (ctx) {
    ctx->variant = variant;
    ctx->channels = c;
  }
  if (variant == FusionVariant::Fusion1) {
    Tensor stacked = concat_channels(box_feat, img_feat);
    return conv2d(stacked, params.reduce_w, params.reduce_b, 1,
                  ctx ? &ctx->conv : nullptr);
  }
  if (c % 2 != 0) {
    throw ConfigError("Fusion2 requires an even channel count, got " +
                      std::to_string(c));
  }
  Tensor rb = conv2d(box_feat, params.box_w, params.box_b, 1,
                     ctx ? &ctx->conv_box : nullptr);
  Tensor ri = conv2d(img_feat, params.img_w, params.img_b, 1,
                     ctx ? &ctx->conv_img : nullptr);
  return concat_channels(rb, ri);
}

FusionGrads fusion_combine_backward(const FusionCtx& ctx,
                                    const FusionParams& params,
                                    const Tensor& grad_out) {
  FusionGrads g;
  if (ctx.variant == FusionVariant::Fusion1) {
    Conv2dGrads cg = conv2d_backward(ctx.conv, params.reduce_w, grad_out);
    auto [gb, gi] = split_channels(cg.input, ctx.channels);
    g.box_feat = std::move(gb);
    g.img_feat = std::move(gi);
    g.params.reduce_w = std::move(cg.weights);
    g.params.reduce_b = std::move(cg.bias);
    return g;
  }
  auto [go_box, go_img] = split_channels(grad_out, ctx.channels / 2);
  Conv2dGrads gb = conv2d_backward(ctx.conv_box, params.box_w, go_box);
  Conv2dGrads gi = conv2d_backward(ctx.conv_img, params.img_w, go_img);
  g.box_feat = std::move(gb.input);
  g.img_feat = std::move(gi.input);
  g.params.box_w = std::move(gb.weights);
  g.params.box_b = std::move(gb.bias);
  g.params.img_w = std::move(gi.weights);
  g.params.img_b = std::move(gi.bias);
  return g;
}

}  // namespace milnet
