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

#ifndef FMSC_TRANSFORMS_H_
#define FMSC_TRANSFORMS_H_

#include <span>
#include <vector>

#include "fmsc/config.h"
#include "fmsc/nn/layers.h"
#include "fmsc/tensor.h"

namespace fmsc {

// Stacks per-frame features [C, h, w] into a volume [C, T, h, w].
Tensor MergeTemporal(std::span<const Tensor> frames);
// Splits a volume [C, T, h, w] into T feature maps [C, h, w].
std::vector<Tensor> SplitTemporal(const Tensor& volume);

// Per-frame 2D downsampling (two stride-2 5x5 convs to C channels), temporal
// merge, then two stride-2 3x3x3 convs to 2C channels:
// [T, H, W] -> y of shape [2C, T/4, H/16, W/16].
class AnalysisTransform {
 public:
  struct Cache {
    std::vector<Tensor> frames;  // [1, H, W]
    std::vector<Tensor> a1;      // [C, H/2, W/2] after activation
    std::vector<Tensor> a2;      // [C, H/4, W/4] after activation
    Tensor merged;               // [C, T, H/4, W/4]
    Tensor b1;                   // [2C, T/2, H/8, W/8] after activation
  };

  AnalysisTransform() = default;
  AnalysisTransform(nn::ParamSet& params, const ModelConfig& config, Rng& rng);

  Tensor Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const;
  void Backward(nn::ParamSet& params, const Tensor& dy, const Cache& cache) const;

 private:
  nn::Conv frame1_, frame2_, vol1_, vol2_;
  double slope_ = 0.2;
};

// Per-slice hyper encoder: [2C, h, w] -> z of shape [4C, h/4, w/4].
class HyperAnalysis {
 public:
  struct Cache {
    Tensor input;
    Tensor a1;
  };

  HyperAnalysis() = default;
  HyperAnalysis(nn::ParamSet& params, const ModelConfig& config, Rng& rng);

  Tensor Forward(const nn::ParamSet& params, const Tensor& y_slice, Cache* cache) const;
  Tensor Backward(nn::ParamSet& params, const Tensor& dz, const Cache& cache) const;

 private:
  nn::Conv conv1_, conv2_;
  double slope_ = 0.2;
};

struct GaussianParams {
  Tensor mu;     // [2C, h, w]
  Tensor sigma;  // [2C, h, w], >= kSigmaFloor
};

// Per-slice hyper decoder: z~ [4C, h/4, w/4] -> two stride-2 transposed
// convs to [4C, h, w]; first 2C channels are the means, the rest pass
// through softplus (floored) to become scales.
class HyperSynthesis {
 public:
  struct Cache {
    Tensor input;
    Tensor a1;
    Tensor raw;  // pre-split output
  };

  HyperSynthesis() = default;
  HyperSynthesis(nn::ParamSet& params, const ModelConfig& config, Rng& rng);

  GaussianParams Forward(const nn::ParamSet& params, const Tensor& z_tilde, Cache* cache) const;
  Tensor Backward(nn::ParamSet& params, const Tensor& dmu, const Tensor& dsigma,
                  const Cache& cache) const;

 private:
  nn::Conv conv1_, conv2_;
  int latent_channels_ = 0;
  double slope_ = 0.2;
};

// y~ [2C, T/4, H/16, W/16] -> two stride-2 transposed 3D convs ->
// [2C, T, H/4, W/4].
class SynthesisFront {
 public:
  struct Cache {
    Tensor input;
    Tensor a1;
    Tensor out;
  };

  SynthesisFront() = default;
  SynthesisFront(nn::ParamSet& params, const ModelConfig& config, Rng& rng);

  Tensor Forward(const nn::ParamSet& params, const Tensor& y_tilde, Cache* cache) const;
  Tensor Backward(nn::ParamSet& params, const Tensor& dout, const Cache& cache) const;

 private:
  nn::Conv conv1_, conv2_;
  double slope_ = 0.2;
};

// Baseline slice decoder used for the SR ablation: [2C, h, w] -> [1, 4h, 4w].
class PlainDecoder {
 public:
  struct Cache {
    Tensor input;
    Tensor a1;
  };

  PlainDecoder() = default;
  PlainDecoder(nn::ParamSet& params, const ModelConfig& config, Rng& rng);

  Tensor Forward(const nn::ParamSet& params, const Tensor& slice, Cache* cache) const;
  Tensor Backward(nn::ParamSet& params, const Tensor& dout, const Cache& cache) const;

 private:
  nn::Conv conv1_, conv2_;
  double slope_ = 0.2;
};

}  // namespace fmsc

#endif  // FMSC_TRANSFORMS_H_
