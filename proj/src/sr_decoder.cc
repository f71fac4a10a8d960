// Copyright 2026 The FMSC Authors. All Rights Reserved.
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

#include "fmsc/sr_decoder.h"

#include <algorithm>
#include <cmath>

#include "fmsc/error.h"

namespace fmsc {

using nn::ConvBackward;
using nn::ConvForward;

namespace {

constexpr double kLayerNormEps = 1e-6;

void RequireFeatures(const Tensor& x, int features, const char* what) {
  Require(x.rank() == 3 && x.dim(0) == features, ErrorKind::kShape,
          std::string(what) + " expects [" + std::to_string(features) + ",h,w], got " +
              ShapeString(x.shape()));
}

}  // namespace

BSConv BSConv::Make(nn::ParamSet& params, const std::string& name, int features, Rng& rng) {
  BSConv b;
  b.pointwise = nn::MakeConv(params, name + ".pw", nn::Conv2d(features, features, 1), rng);
  b.depthwise = nn::MakeDepthwise(params, name + ".dw", features, 3, rng);
  return b;
}

Tensor BSConv::Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const {
  RequireFeatures(x, pointwise.in_channels, "bsconv");
  Tensor mid = ConvForward(params, pointwise, x);
  Tensor out = nn::DepthwiseForward(params, depthwise, mid);
  if (cache) {
    cache->input = x;
    cache->mid = std::move(mid);
  }
  return out;
}

Tensor BSConv::Backward(nn::ParamSet& params, const Tensor& dy, const Cache& cache) const {
  Tensor dmid = nn::DepthwiseBackward(params, depthwise, cache.mid, dy);
  return ConvBackward(params, pointwise, cache.input, dmid);
}

ConvNeXtBlock ConvNeXtBlock::Make(nn::ParamSet& params, const std::string& name, int features,
                                  Rng& rng) {
  ConvNeXtBlock b;
  b.dw = nn::MakeDepthwise(params, name + ".dw", features, 7, rng);
  b.ln_gamma = params.Add(name + ".ln.gamma", {features});
  b.ln_beta = params.Add(name + ".ln.beta", {features});
  std::fill(params.at(b.ln_gamma).value.begin(), params.at(b.ln_gamma).value.end(), 1.0);
  b.expand = nn::MakeConv(params, name + ".expand", nn::Conv2d(features, 4 * features, 1), rng);
  b.project = nn::MakeConv(params, name + ".project", nn::Conv2d(4 * features, features, 1), rng);
  return b;
}

Tensor ConvNeXtBlock::Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const {
  RequireFeatures(x, dw.channels, "convnext");
  const int64_t c = x.dim(0), plane = x.dim(1) * x.dim(2);
  Tensor a = nn::DepthwiseForward(params, dw, x);
  Tensor xhat(a.shape());
  Tensor ln(a.shape());
  std::vector<double> inv_std(static_cast<size_t>(plane));
  const double* gamma = params.at(ln_gamma).value.data();
  const double* beta = params.at(ln_beta).value.data();
  for (int64_t p = 0; p < plane; ++p) {
    double mean = 0.0;
    for (int64_t ch = 0; ch < c; ++ch) mean += a[ch * plane + p];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (int64_t ch = 0; ch < c; ++ch) {
      const double d = a[ch * plane + p] - mean;
      var += d * d;
    }
    var /= static_cast<double>(c);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_std[p] = inv;
    for (int64_t ch = 0; ch < c; ++ch) {
      const double n = (a[ch * plane + p] - mean) * inv;
      xhat[ch * plane + p] = n;
      ln[ch * plane + p] = gamma[ch] * n + beta[ch];
    }
  }
  Tensor e = ConvForward(params, expand, ln);
  Tensor g = nn::Gelu(e);
  Tensor out = ConvForward(params, project, g);
  out += x;
  if (cache) {
    cache->input = x;
    cache->dw = std::move(a);
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
    cache->ln = std::move(ln);
    cache->expanded = std::move(e);
    cache->activated = std::move(g);
  }
  return out;
}

Tensor ConvNeXtBlock::Backward(nn::ParamSet& params, const Tensor& dy, const Cache& cache) const {
  Tensor dg = ConvBackward(params, project, cache.activated, dy);
  nn::GeluBackward(cache.expanded, dg);
  Tensor dln = ConvBackward(params, expand, cache.ln, dg);
  const int64_t c = dln.dim(0), plane = dln.dim(1) * dln.dim(2);
  nn::Param& gp = params.at(ln_gamma);
  nn::Param& bp = params.at(ln_beta);
  Tensor da(dln.shape());
  for (int64_t p = 0; p < plane; ++p) {
    double sum_d = 0.0, sum_dx = 0.0;
    for (int64_t ch = 0; ch < c; ++ch) {
      const size_t i = static_cast<size_t>(ch * plane + p);
      const double n = cache.normalized[i];
      gp.grad[ch] += dln[i] * n;
      bp.grad[ch] += dln[i];
      const double dn = dln[i] * gp.value[ch];
      sum_d += dn;
      sum_dx += dn * n;
    }
    const double inv = cache.inv_std[p];
    for (int64_t ch = 0; ch < c; ++ch) {
      const size_t i = static_cast<size_t>(ch * plane + p);
      const double dn = dln[i] * gp.value[ch];
      da[i] = inv / static_cast<double>(c) *
              (static_cast<double>(c) * dn - sum_d - cache.normalized[i] * sum_dx);
    }
  }
  Tensor dx = nn::DepthwiseBackward(params, dw, cache.input, da);
  dx += dy;
  return dx;
}

SpatialAttention SpatialAttention::Make(nn::ParamSet& params, const std::string& name, int features,
                                        int reduction, double slope, Rng& rng) {
  const int f = std::max(1, features / reduction);
  SpatialAttention s;
  s.slope = slope;
  s.reduce = nn::MakeConv(params, name + ".reduce", nn::Conv2d(features, f, 1), rng);
  s.down = nn::MakeConv(params, name + ".down", nn::Conv2d(f, f, 3, 2, 1), rng);
  s.conv3 = nn::MakeConv(params, name + ".conv3", nn::Conv2d(f, f, 3), rng);
  s.conv4 = nn::MakeConv(params, name + ".conv4", nn::Conv2d(f, f, 3), rng);
  s.restore = nn::MakeConv(params, name + ".restore", nn::Conv2d(f, features, 1), rng);
  return s;
}

Tensor SpatialAttention::Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const {
  RequireFeatures(x, reduce.in_channels, "esa");
  Require(x.dim(1) >= 8 && x.dim(2) >= 8, ErrorKind::kShape,
          "esa needs spatial dims >= 8, got " + ShapeString(x.shape()));
  Cache local;
  Cache& c = cache ? *cache : local;
  c.input = x;
  c.reduced = ConvForward(params, reduce, x);
  c.down = ConvForward(params, down, c.reduced);
  c.pooled = nn::MaxPool2d(c.down, 7, 3, &c.pool);
  c.c3 = nn::LeakyRelu(ConvForward(params, conv3, c.pooled), slope);
  c.c4 = ConvForward(params, conv4, c.c3);
  c.up = nn::ResizeBilinear(c.c4, x.dim(1), x.dim(2));
  c.mask = ConvForward(params, restore, c.up);
  for (double& v : c.mask.values()) v = nn::Sigmoid(v);
  Tensor out(x.shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = x[i] * c.mask[i];
  return out;
}

Tensor SpatialAttention::Mask(const nn::ParamSet& params, const Tensor& x) const {
  Cache c;
  Forward(params, x, &c);
  return c.mask;
}

Tensor SpatialAttention::Backward(nn::ParamSet& params, const Tensor& dy, const Cache& c) const {
  Tensor dx(c.input.shape());
  Tensor dlogit(c.mask.shape());
  for (size_t i = 0; i < dy.size(); ++i) {
    dx[i] = dy[i] * c.mask[i];
    const double m = c.mask[i];
    dlogit[i] = dy[i] * c.input[i] * m * (1.0 - m);
  }
  Tensor dup = ConvBackward(params, restore, c.up, dlogit);
  Tensor dc4 = nn::ResizeBilinearBackward(dup, c.c4.shape());
  Tensor dc3 = ConvBackward(params, conv4, c.c3, dc4);
  nn::LeakyReluBackward(c.c3, slope, dc3);
  Tensor dpooled = ConvBackward(params, conv3, c.pooled, dc3);
  Tensor ddown = nn::MaxPool2dBackward(dpooled, c.pool);
  Tensor dreduced = ConvBackward(params, down, c.reduced, ddown);
  dx += ConvBackward(params, reduce, c.input, dreduced);
  return dx;
}

ContrastChannelAttention ContrastChannelAttention::Make(nn::ParamSet& params,
                                                        const std::string& name, int features,
                                                        int reduction, double slope, Rng& rng) {
  const int f = std::max(1, features / reduction);
  ContrastChannelAttention a;
  a.slope = slope;
  a.reduce = nn::MakeConv(params, name + ".reduce", nn::Conv2d(features, f, 1), rng);
  a.restore = nn::MakeConv(params, name + ".restore", nn::Conv2d(f, features, 1), rng);
  return a;
}

Tensor ContrastChannelAttention::Forward(const nn::ParamSet& params, const Tensor& x,
                                         Cache* cache) const {
  RequireFeatures(x, reduce.in_channels, "cca");
  const int64_t c = x.dim(0), plane = x.dim(1) * x.dim(2);
  Cache local;
  Cache& k = cache ? *cache : local;
  k.input = x;
  k.mean.assign(static_cast<size_t>(c), 0.0);
  k.stddev.assign(static_cast<size_t>(c), 0.0);
  k.contrast = Tensor({c, 1, 1});
  for (int64_t ch = 0; ch < c; ++ch) {
    const double* p = x.data() + ch * plane;
    double m = 0.0;
    for (int64_t i = 0; i < plane; ++i) m += p[i];
    m /= static_cast<double>(plane);
    double v = 0.0;
    for (int64_t i = 0; i < plane; ++i) v += (p[i] - m) * (p[i] - m);
    v /= static_cast<double>(plane);
    k.mean[ch] = m;
    k.stddev[ch] = std::sqrt(v);
    k.contrast[ch] = m + k.stddev[ch];
  }
  k.hidden = nn::LeakyRelu(ConvForward(params, reduce, k.contrast), slope);
  k.mask = ConvForward(params, restore, k.hidden);
  for (double& v : k.mask.values()) v = nn::Sigmoid(v);
  Tensor out(x.shape());
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t i = 0; i < plane; ++i) out[ch * plane + i] = x[ch * plane + i] * k.mask[ch];
  return out;
}

Tensor ContrastChannelAttention::Mask(const nn::ParamSet& params, const Tensor& x) const {
  Cache k;
  Forward(params, x, &k);
  return k.mask;
}

Tensor ContrastChannelAttention::Backward(nn::ParamSet& params, const Tensor& dy,
                                          const Cache& k) const {
  const int64_t c = dy.dim(0), plane = dy.dim(1) * dy.dim(2);
  Tensor dx(dy.shape());
  Tensor dlogit({c, 1, 1});
  for (int64_t ch = 0; ch < c; ++ch) {
    double dm = 0.0;
    for (int64_t i = 0; i < plane; ++i) {
      const size_t j = static_cast<size_t>(ch * plane + i);
      dx[j] = dy[j] * k.mask[ch];
      dm += dy[j] * k.input[j];
    }
    dlogit[ch] = dm * k.mask[ch] * (1.0 - k.mask[ch]);
  }
  Tensor dhidden = ConvBackward(params, restore, k.hidden, dlogit);
  nn::LeakyReluBackward(k.hidden, slope, dhidden);
  Tensor dcontrast = ConvBackward(params, reduce, k.contrast, dhidden);
  const double n = static_cast<double>(plane);
  for (int64_t ch = 0; ch < c; ++ch) {
    const double ds = dcontrast[ch];
    const double sd = k.stddev[ch];
    for (int64_t i = 0; i < plane; ++i) {
      const size_t j = static_cast<size_t>(ch * plane + i);
      double g = ds / n;
      // d std / dx is undefined at std = 0; use the zero subgradient there.
      if (sd > 0.0) g += ds * (k.input[j] - k.mean[ch]) / (n * sd);
      dx[j] += g;
    }
  }
  return dx;
}

BcbBlock BcbBlock::Make(nn::ParamSet& params, const std::string& name, const SRConfig& config,
                        double slope, Rng& rng) {
  BcbBlock b;
  b.bsconv = BSConv::Make(params, name + ".bsconv", config.features, rng);
  b.convnext = ConvNeXtBlock::Make(params, name + ".convnext", config.features, rng);
  b.esa = SpatialAttention::Make(params, name + ".esa", config.features, config.esa_reduction,
                                 slope, rng);
  b.cca = ContrastChannelAttention::Make(params, name + ".cca", config.features,
                                         config.cca_reduction, slope, rng);
  return b;
}

Tensor BcbBlock::Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const {
  Tensor a = bsconv.Forward(params, x, cache ? &cache->bs : nullptr);
  Tensor b = convnext.Forward(params, a, cache ? &cache->cn : nullptr);
  Tensor c = esa.Forward(params, b, cache ? &cache->esa : nullptr);
  return cca.Forward(params, c, cache ? &cache->cca : nullptr);
}

Tensor BcbBlock::Backward(nn::ParamSet& params, const Tensor& dy, const Cache& cache) const {
  Tensor d = cca.Backward(params, dy, cache.cca);
  d = esa.Backward(params, d, cache.esa);
  d = convnext.Backward(params, d, cache.cn);
  return bsconv.Backward(params, d, cache.bs);
}

Tensor ChannelShuffleUp(const Tensor& x, int factor) {
  const int64_t r = factor;
  Require(x.rank() == 3 && x.dim(0) == r * r, ErrorKind::kShape,
          "channel shuffle expects [" + std::to_string(r * r) + ",h,w], got " +
              ShapeString(x.shape()));
  const int64_t h = x.dim(1), w = x.dim(2);
  Tensor y({1, r * h, r * w});
  for (int64_t a = 0; a < r; ++a)
    for (int64_t b = 0; b < r; ++b) {
      const double* src = x.data() + (a * r + b) * h * w;
      for (int64_t i = 0; i < h; ++i)
        for (int64_t j = 0; j < w; ++j) y[(r * i + a) * r * w + r * j + b] = src[i * w + j];
    }
  return y;
}

Tensor ChannelShuffleDown(const Tensor& y, int factor) {
  const int64_t r = factor;
  Require(y.rank() == 3 && y.dim(0) == 1 && y.dim(1) % r == 0 && y.dim(2) % r == 0,
          ErrorKind::kShape, "inverse channel shuffle expects [1, r*h, r*w]");
  const int64_t h = y.dim(1) / r, w = y.dim(2) / r;
  Tensor x({r * r, h, w});
  for (int64_t a = 0; a < r; ++a)
    for (int64_t b = 0; b < r; ++b) {
      double* dst = x.data() + (a * r + b) * h * w;
      for (int64_t i = 0; i < h; ++i)
        for (int64_t j = 0; j < w; ++j) dst[i * w + j] = y[(r * i + a) * r * w + r * j + b];
    }
  return x;
}

SuperResolutionDecoder::SuperResolutionDecoder(nn::ParamSet& params, const SRConfig& config,
                                               double slope, Rng& rng)
    : config_(config) {
  config.Validate();
  const int f = config.features;
  shallow_ = nn::MakeConv(params, "sr.shallow", nn::Conv2d(config.in_channels, f, 3), rng);
  for (int b = 0; b < config.num_blocks; ++b)
    blocks_.push_back(BcbBlock::Make(params, "sr.bcb" + std::to_string(b), config, slope, rng));
  fuse_ = nn::MakeConv(params, "sr.fuse", nn::Conv2d(config.num_blocks * f, f, 1), rng);
  const int up = config.upscale * config.upscale;
  head_ = nn::MakeConv(params, "sr.head", nn::Conv2d(f, up, 3), rng);
}

Tensor SuperResolutionDecoder::ShallowExtract(const nn::ParamSet& params, const Tensor& slice) const {
  Require(slice.rank() == 3 && slice.dim(0) == config_.in_channels, ErrorKind::kShape,
          "SR input must be [" + std::to_string(config_.in_channels) + ",h,w], got " +
              ShapeString(slice.shape()));
  return ConvForward(params, shallow_, slice);
}

Tensor SuperResolutionDecoder::Forward(const nn::ParamSet& params, const Tensor& slice,
                                       Cache* cache) const {
  Tensor shallow = ShallowExtract(params, slice);
  const int64_t f = config_.features, plane = shallow.dim(1) * shallow.dim(2);
  const int64_t nb = static_cast<int64_t>(blocks_.size());
  Tensor concat({nb * f, shallow.dim(1), shallow.dim(2)});
  if (cache) cache->blocks.resize(blocks_.size());
  Tensor cur = shallow;
  for (int64_t b = 0; b < nb; ++b) {
    cur = blocks_[b].Forward(params, cur, cache ? &cache->blocks[b] : nullptr);
    std::copy_n(cur.data(), f * plane, concat.data() + b * f * plane);
    if (cache) cache->block_out.push_back(cur);
  }
  Tensor fused = ConvForward(params, fuse_, concat);
  fused += shallow;
  Tensor head = ConvForward(params, head_, fused);
  if (cache) {
    cache->input = slice;
    cache->shallow = std::move(shallow);
    cache->concat = std::move(concat);
    cache->fused_sum = std::move(fused);
  }
  return ChannelShuffleUp(head, config_.upscale);
}

Tensor SuperResolutionDecoder::Backward(nn::ParamSet& params, const Tensor& dout,
                                        const Cache& cache) const {
  Tensor dhead = ChannelShuffleDown(dout, config_.upscale);
  Tensor dfused = ConvBackward(params, head_, cache.fused_sum, dhead);
  Tensor dconcat = ConvBackward(params, fuse_, cache.concat, dfused);
  Tensor dshallow = dfused;
  const int64_t f = config_.features, plane = cache.shallow.dim(1) * cache.shallow.dim(2);
  Tensor dcur(cache.shallow.shape());
  for (int64_t b = static_cast<int64_t>(blocks_.size()) - 1; b >= 0; --b) {
    const double* src = dconcat.data() + b * f * plane;
    for (int64_t i = 0; i < f * plane; ++i) dcur[i] += src[i];
    dcur = blocks_[b].Backward(params, dcur, cache.blocks[b]);
  }
  dshallow += dcur;
  return ConvBackward(params, shallow_, cache.input, dshallow);
}

}  // namespace fmsc
