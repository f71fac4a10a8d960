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

#include "fmsc/transforms.h"

#include "fmsc/error.h"

namespace fmsc {

using nn::ConvBackward;
using nn::ConvForward;
using nn::LeakyRelu;
using nn::LeakyReluBackward;

Tensor MergeTemporal(std::span<const Tensor> frames) {
  Require(!frames.empty(), ErrorKind::kShape, "cannot merge zero frames");
  const Shape& fs = frames[0].shape();
  Require(fs.size() == 3, ErrorKind::kShape, "frames must be [C,h,w], got " + ShapeString(fs));
  const int64_t c = fs[0], plane = fs[1] * fs[2], t = static_cast<int64_t>(frames.size());
  Tensor out({c, t, fs[1], fs[2]});
  for (int64_t i = 0; i < t; ++i) {
    Require(frames[i].shape() == fs, ErrorKind::kShape,
            "inconsistent frame shapes: " + ShapeString(fs) + " vs " +
                ShapeString(frames[i].shape()));
    for (int64_t ch = 0; ch < c; ++ch)
      std::copy_n(frames[i].data() + ch * plane, plane, out.data() + (ch * t + i) * plane);
  }
  return out;
}

std::vector<Tensor> SplitTemporal(const Tensor& volume) {
  Require(volume.rank() == 4, ErrorKind::kShape,
          "temporal split expects [C,T,h,w], got " + ShapeString(volume.shape()));
  const int64_t c = volume.dim(0), t = volume.dim(1), plane = volume.dim(2) * volume.dim(3);
  std::vector<Tensor> slices;
  slices.reserve(t);
  for (int64_t i = 0; i < t; ++i) {
    Tensor s({c, volume.dim(2), volume.dim(3)});
    for (int64_t ch = 0; ch < c; ++ch)
      std::copy_n(volume.data() + (ch * t + i) * plane, plane, s.data() + ch * plane);
    slices.push_back(std::move(s));
  }
  return slices;
}

AnalysisTransform::AnalysisTransform(nn::ParamSet& params, const ModelConfig& config, Rng& rng)
    : slope_(config.leaky_slope) {
  const int c = config.channels;
  frame1_ = nn::MakeConv(params, "enc.frame1", nn::Conv2d(1, c, 5, 2, 2), rng);
  frame2_ = nn::MakeConv(params, "enc.frame2", nn::Conv2d(c, c, 5, 2, 2), rng);
  vol1_ = nn::MakeConv(params, "enc.vol1", nn::Conv3d(c, 2 * c, 3, 2, 1), rng);
  vol2_ = nn::MakeConv(params, "enc.vol2", nn::Conv3d(2 * c, 2 * c, 3, 2, 1), rng);
}

Tensor AnalysisTransform::Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const {
  Require(x.rank() == 3, ErrorKind::kShape, "encoder input must be [T,H,W]");
  const int64_t t = x.dim(0), h = x.dim(1), w = x.dim(2);
  Require(t % 4 == 0 && t > 0 && h % 64 == 0 && w % 64 == 0 && h > 0 && w > 0, ErrorKind::kShape,
          "encoder input " + ShapeString(x.shape()) +
              " needs T divisible by 4 and H, W divisible by 64");
  std::vector<Tensor> feats;
  feats.reserve(t);
  for (int64_t i = 0; i < t; ++i) {
    Tensor frame({1, h, w});
    std::copy_n(x.data() + i * h * w, h * w, frame.data());
    Tensor a1 = LeakyRelu(ConvForward(params, frame1_, frame), slope_);
    Tensor a2 = LeakyRelu(ConvForward(params, frame2_, a1), slope_);
    if (cache) {
      cache->frames.push_back(std::move(frame));
      cache->a1.push_back(std::move(a1));
      cache->a2.push_back(a2);
    }
    feats.push_back(std::move(a2));
  }
  Tensor merged = MergeTemporal(feats);
  Tensor b1 = LeakyRelu(ConvForward(params, vol1_, merged), slope_);
  Tensor y = ConvForward(params, vol2_, b1);
  if (cache) {
    cache->merged = std::move(merged);
    cache->b1 = std::move(b1);
  }
  return y;
}

void AnalysisTransform::Backward(nn::ParamSet& params, const Tensor& dy, const Cache& cache) const {
  Tensor db1 = ConvBackward(params, vol2_, cache.b1, dy);
  LeakyReluBackward(cache.b1, slope_, db1);
  Tensor dmerged = ConvBackward(params, vol1_, cache.merged, db1);
  std::vector<Tensor> dframes = SplitTemporal(dmerged);
  for (size_t i = 0; i < dframes.size(); ++i) {
    LeakyReluBackward(cache.a2[i], slope_, dframes[i]);
    Tensor da1 = ConvBackward(params, frame2_, cache.a1[i], dframes[i]);
    LeakyReluBackward(cache.a1[i], slope_, da1);
    ConvBackward(params, frame1_, cache.frames[i], da1, /*need_input_grad=*/false);
  }
}

HyperAnalysis::HyperAnalysis(nn::ParamSet& params, const ModelConfig& config, Rng& rng)
    : slope_(config.leaky_slope) {
  const int c = config.channels;
  conv1_ = nn::MakeConv(params, "hyper_enc.conv1", nn::Conv2d(2 * c, 4 * c, 5, 2, 2), rng);
  conv2_ = nn::MakeConv(params, "hyper_enc.conv2", nn::Conv2d(4 * c, 4 * c, 5, 2, 2), rng);
}

Tensor HyperAnalysis::Forward(const nn::ParamSet& params, const Tensor& y_slice, Cache* cache) const {
  Require(y_slice.rank() == 3 && y_slice.dim(1) % 4 == 0 && y_slice.dim(2) % 4 == 0,
          ErrorKind::kShape, "hyper encoder input " + ShapeString(y_slice.shape()) + " invalid");
  Tensor a1 = LeakyRelu(ConvForward(params, conv1_, y_slice), slope_);
  Tensor z = ConvForward(params, conv2_, a1);
  if (cache) {
    cache->input = y_slice;
    cache->a1 = std::move(a1);
  }
  return z;
}

Tensor HyperAnalysis::Backward(nn::ParamSet& params, const Tensor& dz, const Cache& cache) const {
  Tensor da1 = ConvBackward(params, conv2_, cache.a1, dz);
  LeakyReluBackward(cache.a1, slope_, da1);
  return ConvBackward(params, conv1_, cache.input, da1);
}

HyperSynthesis::HyperSynthesis(nn::ParamSet& params, const ModelConfig& config, Rng& rng)
    : latent_channels_(2 * config.channels), slope_(config.leaky_slope) {
  const int c = config.channels;
  conv1_ = nn::MakeConv(params, "hyper_dec.conv1", nn::ConvTranspose2d(4 * c, 4 * c, 5, 2, 2, 1), rng);
  conv2_ = nn::MakeConv(params, "hyper_dec.conv2", nn::ConvTranspose2d(4 * c, 4 * c, 5, 2, 2, 1), rng);
}

GaussianParams HyperSynthesis::Forward(const nn::ParamSet& params, const Tensor& z_tilde,
                                       Cache* cache) const {
  Require(z_tilde.rank() == 3 && z_tilde.dim(0) == 2 * latent_channels_, ErrorKind::kShape,
          "hyper decoder input " + ShapeString(z_tilde.shape()) + " invalid");
  Tensor a1 = LeakyRelu(ConvForward(params, conv1_, z_tilde), slope_);
  Tensor raw = ConvForward(params, conv2_, a1);
  GaussianParams gp;
  gp.mu = SliceChannels(raw, 0, latent_channels_);
  gp.sigma = SliceChannels(raw, latent_channels_, latent_channels_);
  for (double& s : gp.sigma.values()) s = std::max(nn::Softplus(s), kSigmaFloor);
  if (cache) {
    cache->input = z_tilde;
    cache->a1 = std::move(a1);
    cache->raw = std::move(raw);
  }
  return gp;
}

Tensor HyperSynthesis::Backward(nn::ParamSet& params, const Tensor& dmu, const Tensor& dsigma,
                                const Cache& cache) const {
  Tensor draw(cache.raw.shape());
  AssignChannels(draw, 0, dmu);
  Tensor ds = dsigma;
  const int64_t plane = cache.raw.size() / cache.raw.dim(0);
  const double* raw_sigma = cache.raw.data() + latent_channels_ * plane;
  for (size_t i = 0; i < ds.size(); ++i) {
    const double v = raw_sigma[i];
    // Below the floor the scale is constant.
    ds[i] = nn::Softplus(v) > kSigmaFloor ? ds[i] * nn::Sigmoid(v) : 0.0;
  }
  AssignChannels(draw, latent_channels_, ds);
  Tensor da1 = ConvBackward(params, conv2_, cache.a1, draw);
  LeakyReluBackward(cache.a1, slope_, da1);
  return ConvBackward(params, conv1_, cache.input, da1);
}

SynthesisFront::SynthesisFront(nn::ParamSet& params, const ModelConfig& config, Rng& rng)
    : slope_(config.leaky_slope) {
  const int c2 = 2 * config.channels;
  conv1_ = nn::MakeConv(params, "synth.conv1", nn::ConvTranspose3d(c2, c2, 3, 2, 1, 1), rng);
  conv2_ = nn::MakeConv(params, "synth.conv2", nn::ConvTranspose3d(c2, c2, 3, 2, 1, 1), rng);
}

Tensor SynthesisFront::Forward(const nn::ParamSet& params, const Tensor& y_tilde, Cache* cache) const {
  Require(y_tilde.rank() == 4, ErrorKind::kShape,
          "synthesis input must be [2C,T/4,h,w], got " + ShapeString(y_tilde.shape()));
  Tensor a1 = LeakyRelu(ConvForward(params, conv1_, y_tilde), slope_);
  Tensor out = LeakyRelu(ConvForward(params, conv2_, a1), slope_);
  if (cache) {
    cache->input = y_tilde;
    cache->a1 = std::move(a1);
    cache->out = out;
  }
  return out;
}

Tensor SynthesisFront::Backward(nn::ParamSet& params, const Tensor& dout, const Cache& cache) const {
  Tensor d = dout;
  LeakyReluBackward(cache.out, slope_, d);
  Tensor da1 = ConvBackward(params, conv2_, cache.a1, d);
  LeakyReluBackward(cache.a1, slope_, da1);
  return ConvBackward(params, conv1_, cache.input, da1);
}

PlainDecoder::PlainDecoder(nn::ParamSet& params, const ModelConfig& config, Rng& rng)
    : slope_(config.leaky_slope) {
  const int c2 = 2 * config.channels, f = config.sr.features;
  conv1_ = nn::MakeConv(params, "plain.conv1", nn::ConvTranspose2d(c2, f, 5, 2, 2, 1), rng);
  conv2_ = nn::MakeConv(params, "plain.conv2", nn::ConvTranspose2d(f, 1, 5, 2, 2, 1), rng);
}

Tensor PlainDecoder::Forward(const nn::ParamSet& params, const Tensor& slice, Cache* cache) const {
  Tensor a1 = LeakyRelu(ConvForward(params, conv1_, slice), slope_);
  Tensor out = ConvForward(params, conv2_, a1);
  if (cache) {
    cache->input = slice;
    cache->a1 = std::move(a1);
  }
  return out;
}

Tensor PlainDecoder::Backward(nn::ParamSet& params, const Tensor& dout, const Cache& cache) const {
  Tensor da1 = ConvBackward(params, conv2_, cache.a1, dout);
  LeakyReluBackward(cache.a1, slope_, da1);
  return ConvBackward(params, conv1_, cache.input, da1);
}

}  // namespace fmsc
