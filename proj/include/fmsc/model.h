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

#ifndef FMSC_MODEL_H_
#define FMSC_MODEL_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fmsc/config.h"
#include "fmsc/entropy.h"
#include "fmsc/nn/params.h"
#include "fmsc/sr_decoder.h"
#include "fmsc/tensor.h"
#include "fmsc/transforms.h"

namespace fmsc {

enum class QuantMode {
  kNoise,  // additive U(-0.5, 0.5): differentiable training relaxation
  kRound,  // hard rounding: inference
};

struct ForwardResult {
  Tensor x_hat;                        // [T, H, W]
  Tensor y;                            // [2C, T/4, H/16, W/16]
  Tensor y_tilde;                      // noisy or rounded y
  std::vector<Tensor> z;               // per slice [4C, H/64, W/64]
  std::vector<Tensor> z_tilde;
  std::vector<GaussianParams> gauss;   // per slice
  double y_bits = 0.0;
  double z_bits = 0.0;
};

// The complete codec network: analysis transform, per-slice hyperprior,
// 3D synthesis front, per-slice SR (or plain) decoder and the factorized
// hyper-latent prior. Immutable during inference; training mutates params().
class Model {
 public:
  struct Pass;  // activations retained for Backward

  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  Tensor Encode(const Tensor& x) const;
  Tensor HyperEncode(const Tensor& y_slice) const;
  GaussianParams HyperDecode(const Tensor& z_tilde) const;
  Tensor SynthesizeFront(const Tensor& y_tilde) const;
  // One [2C, H/4, W/4] slice -> [1, H, W].
  Tensor DecodeSlice(const Tensor& slice) const;
  // Synthesis front plus per-slice decoding: y~ -> x^ [T, H, W].
  Tensor Reconstruct(const Tensor& y_tilde) const;

  const SuperResolutionDecoder& sr() const { return sr_; }
  const entropy::FactorizedPrior& prior() const { return prior_; }

  // Full pass; when pass is non-null, activations are retained for Backward
  // (noise mode only).
  ForwardResult Forward(const Tensor& x, QuantMode mode, uint64_t noise_seed, Pass* pass) const;
  // Accumulates parameter gradients given dL/dx^ and the weights of the two
  // rate totals in the loss.
  void Backward(const Pass& pass, const Tensor& dx_hat, double y_bits_weight,
                double z_bits_weight);

  size_t ParamCount() const { return params_.ScalarCount(); }
  // Scalar counts keyed by submodule prefix (enc, hyper_enc, hyper_dec, synth,
  // sr or plain, prior).
  std::map<std::string, size_t> ParamBreakdown() const;

 private:
  ModelConfig config_;
  nn::ParamSet params_;
  AnalysisTransform encoder_;
  HyperAnalysis hyper_encoder_;
  HyperSynthesis hyper_decoder_;
  SynthesisFront synthesis_;
  SuperResolutionDecoder sr_;
  PlainDecoder plain_;
  entropy::FactorizedPrior prior_;
};

struct Model::Pass {
  AnalysisTransform::Cache encoder;
  std::vector<Tensor> y_tilde_slices;
  std::vector<HyperAnalysis::Cache> hyper_enc;
  std::vector<HyperSynthesis::Cache> hyper_dec;
  std::vector<Tensor> z_tilde;
  std::vector<GaussianParams> gauss;
  SynthesisFront::Cache synthesis;
  std::vector<SuperResolutionDecoder::Cache> sr;
  std::vector<PlainDecoder::Cache> plain;
};

}  // namespace fmsc

#endif  // FMSC_MODEL_H_
