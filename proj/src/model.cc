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

#include "fmsc/model.h"

#include "fmsc/error.h"
#include "fmsc/random.h"

namespace fmsc {

Model::Model(const ModelConfig& config) : config_(config) {
  config_.Validate();
  Rng rng(config_.seed);
  encoder_ = AnalysisTransform(params_, config_, rng);
  hyper_encoder_ = HyperAnalysis(params_, config_, rng);
  hyper_decoder_ = HyperSynthesis(params_, config_, rng);
  synthesis_ = SynthesisFront(params_, config_, rng);
  if (config_.decoder == DecoderKind::kSuperResolution)
    sr_ = SuperResolutionDecoder(params_, config_.sr, config_.leaky_slope, rng);
  else
    plain_ = PlainDecoder(params_, config_, rng);
  prior_ = entropy::FactorizedPrior(params_, "prior", 4 * config_.channels, rng);
}

Tensor Model::Encode(const Tensor& x) const { return encoder_.Forward(params_, x, nullptr); }

Tensor Model::HyperEncode(const Tensor& y_slice) const {
  Require(y_slice.rank() == 3 && y_slice.dim(0) == 2 * config_.channels, ErrorKind::kShape,
          "latent slice must have 2C channels, got " + ShapeString(y_slice.shape()));
  return hyper_encoder_.Forward(params_, y_slice, nullptr);
}

GaussianParams Model::HyperDecode(const Tensor& z_tilde) const {
  return hyper_decoder_.Forward(params_, z_tilde, nullptr);
}

Tensor Model::SynthesizeFront(const Tensor& y_tilde) const {
  Require(y_tilde.rank() == 4 && y_tilde.dim(0) == 2 * config_.channels, ErrorKind::kShape,
          "latent must be [2C,T/4,h,w], got " + ShapeString(y_tilde.shape()));
  return synthesis_.Forward(params_, y_tilde, nullptr);
}

Tensor Model::DecodeSlice(const Tensor& slice) const {
  if (config_.decoder == DecoderKind::kSuperResolution) return sr_.Forward(params_, slice, nullptr);
  return plain_.Forward(params_, slice, nullptr);
}

namespace {

// Stacks per-frame [1, H, W] outputs into [T, H, W].
Tensor StackFrames(const std::vector<Tensor>& frames) {
  const int64_t h = frames[0].dim(1), w = frames[0].dim(2);
  Tensor out({static_cast<int64_t>(frames.size()), h, w});
  for (size_t t = 0; t < frames.size(); ++t)
    std::copy_n(frames[t].data(), h * w, out.data() + t * h * w);
  return out;
}

Tensor FrameOf(const Tensor& x, int64_t t) {
  const int64_t h = x.dim(1), w = x.dim(2);
  Tensor f({1, h, w});
  std::copy_n(x.data() + t * h * w, h * w, f.data());
  return f;
}

}  // namespace

Tensor Model::Reconstruct(const Tensor& y_tilde) const {
  const std::vector<Tensor> slices = SplitTemporal(SynthesizeFront(y_tilde));
  std::vector<Tensor> frames;
  frames.reserve(slices.size());
  for (const Tensor& s : slices) frames.push_back(DecodeSlice(s));
  return StackFrames(frames);
}

ForwardResult Model::Forward(const Tensor& x, QuantMode mode, uint64_t noise_seed,
                             Pass* pass) const {
  Require(pass == nullptr || mode == QuantMode::kNoise, ErrorKind::kTraining,
          "gradients are only available in noise mode");
  ForwardResult r;
  r.y = encoder_.Forward(params_, x, pass ? &pass->encoder : nullptr);
  if (mode == QuantMode::kNoise) {
    r.y_tilde = Tensor(r.y.shape(), entropy::AddUniformNoise(r.y.span(), MixSeed(noise_seed, 0)));
  } else {
    r.y_tilde = Tensor(r.y.shape());
    for (size_t i = 0; i < r.y.size(); ++i) r.y_tilde[i] = entropy::RoundHalfAway(r.y[i]);
  }

  const std::vector<Tensor> y_slices = SplitTemporal(r.y);
  const std::vector<Tensor> yt_slices = SplitTemporal(r.y_tilde);
  const size_t n_slices = y_slices.size();
  if (pass) {
    pass->hyper_enc.resize(n_slices);
    pass->hyper_dec.resize(n_slices);
  }
  for (size_t i = 0; i < n_slices; ++i) {
    Tensor z = hyper_encoder_.Forward(params_, y_slices[i], pass ? &pass->hyper_enc[i] : nullptr);
    Tensor zt;
    if (mode == QuantMode::kNoise) {
      zt = Tensor(z.shape(), entropy::AddUniformNoise(z.span(), MixSeed(noise_seed, 1 + i)));
    } else {
      zt = Tensor(z.shape());
      for (size_t k = 0; k < z.size(); ++k) zt[k] = entropy::RoundHalfAway(z[k]);
    }
    GaussianParams gp = hyper_decoder_.Forward(params_, zt, pass ? &pass->hyper_dec[i] : nullptr);
    r.y_bits += entropy::GaussianLikelihoodBits(yt_slices[i].span(), gp.mu.span(), gp.sigma.span()).total;
    r.z_bits += prior_.Bits(params_, zt).total;
    r.z.push_back(std::move(z));
    r.z_tilde.push_back(std::move(zt));
    r.gauss.push_back(std::move(gp));
  }

  Tensor front = synthesis_.Forward(params_, r.y_tilde, pass ? &pass->synthesis : nullptr);
  const std::vector<Tensor> slices = SplitTemporal(front);
  std::vector<Tensor> frames;
  frames.reserve(slices.size());
  if (pass) {
    if (config_.decoder == DecoderKind::kSuperResolution)
      pass->sr.resize(slices.size());
    else
      pass->plain.resize(slices.size());
  }
  for (size_t t = 0; t < slices.size(); ++t) {
    if (config_.decoder == DecoderKind::kSuperResolution)
      frames.push_back(sr_.Forward(params_, slices[t], pass ? &pass->sr[t] : nullptr));
    else
      frames.push_back(plain_.Forward(params_, slices[t], pass ? &pass->plain[t] : nullptr));
  }
  r.x_hat = StackFrames(frames);
  if (pass) {
    pass->y_tilde_slices = yt_slices;
    pass->z_tilde = r.z_tilde;
    pass->gauss = r.gauss;
  }
  return r;
}

void Model::Backward(const Pass& pass, const Tensor& dx_hat, double y_bits_weight,
                     double z_bits_weight) {
  const int64_t frames = dx_hat.dim(0);
  std::vector<Tensor> dslices;
  dslices.reserve(frames);
  for (int64_t t = 0; t < frames; ++t) {
    Tensor dframe = FrameOf(dx_hat, t);
    if (config_.decoder == DecoderKind::kSuperResolution)
      dslices.push_back(sr_.Backward(params_, dframe, pass.sr[t]));
    else
      dslices.push_back(plain_.Backward(params_, dframe, pass.plain[t]));
  }
  Tensor dfront = MergeTemporal(dslices);
  std::vector<Tensor> dyt = SplitTemporal(synthesis_.Backward(params_, dfront, pass.synthesis));

  std::vector<Tensor> dy_slices(dyt.size());
  for (size_t i = 0; i < dyt.size(); ++i) {
    const GaussianParams& gp = pass.gauss[i];
    Tensor dmu(gp.mu.shape()), dsigma(gp.sigma.shape());
    entropy::GaussianLikelihoodBitsBackward(pass.y_tilde_slices[i].span(), gp.mu.span(),
                                            gp.sigma.span(), y_bits_weight, dyt[i].span(),
                                            dmu.span(), dsigma.span());
    Tensor dz = hyper_decoder_.Backward(params_, dmu, dsigma, pass.hyper_dec[i]);
    prior_.BitsBackward(params_, pass.z_tilde[i], z_bits_weight, dz);
    dy_slices[i] = hyper_encoder_.Backward(params_, dz, pass.hyper_enc[i]);
    // The noisy latent is y + u, so its gradient flows straight to y.
    dy_slices[i] += dyt[i];
  }
  encoder_.Backward(params_, MergeTemporal(dy_slices), pass.encoder);
}

std::map<std::string, size_t> Model::ParamBreakdown() const {
  std::map<std::string, size_t> out;
  for (const auto& p : params_) {
    const std::string prefix = p.name.substr(0, p.name.find('.'));
    out[prefix] += p.size();
  }
  return out;
}

}  // namespace fmsc
