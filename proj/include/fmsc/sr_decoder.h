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

#ifndef FMSC_SR_DECODER_H_
#define FMSC_SR_DECODER_H_

#include <string>
#include <vector>

#include "fmsc/config.h"
#include "fmsc/nn/layers.h"
#include "fmsc/tensor.h"

namespace fmsc {

// Blueprint-separable convolution: 1x1 pointwise then 3x3 depthwise.
struct BSConv {
  struct Cache {
    Tensor input;
    Tensor mid;
  };
  nn::Conv pointwise;
  nn::DepthwiseConv depthwise;

  static BSConv Make(nn::ParamSet& params, const std::string& name, int features, Rng& rng);
  Tensor Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const;
  Tensor Backward(nn::ParamSet& params, const Tensor& dy, const Cache& cache) const;
};

// 7x7 depthwise -> channel LayerNorm -> 1x1 expand (4F) -> GELU -> 1x1
// project (F) -> residual add.
struct ConvNeXtBlock {
  struct Cache {
    Tensor input;
    Tensor dw;
    Tensor normalized;  // before the affine transform
    std::vector<double> inv_std;
    Tensor ln;
    Tensor expanded;  // pre-GELU
    Tensor activated;
  };
  nn::DepthwiseConv dw;
  size_t ln_gamma = 0;
  size_t ln_beta = 0;
  nn::Conv expand;
  nn::Conv project;

  static ConvNeXtBlock Make(nn::ParamSet& params, const std::string& name, int features, Rng& rng);
  Tensor Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const;
  Tensor Backward(nn::ParamSet& params, const Tensor& dy, const Cache& cache) const;
};

// Enhanced spatial attention: a downsample/upsample pyramid producing a
// sigmoid mask in (0, 1) that multiplies the input.
struct SpatialAttention {
  struct Cache {
    Tensor input;
    Tensor reduced, down, pooled, c3, c4, up, mask;
    nn::PoolCache pool;
  };
  nn::Conv reduce, down, conv3, conv4, restore;
  double slope = 0.2;

  static SpatialAttention Make(nn::ParamSet& params, const std::string& name, int features,
                               int reduction, double slope, Rng& rng);
  Tensor Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const;
  Tensor Mask(const nn::ParamSet& params, const Tensor& x) const;
  Tensor Backward(nn::ParamSet& params, const Tensor& dy, const Cache& cache) const;
};

// Contrast-aware channel attention: per-channel (mean + std) -> 1x1 reduce
// -> activation -> 1x1 restore -> sigmoid channel mask.
struct ContrastChannelAttention {
  struct Cache {
    Tensor input;
    std::vector<double> mean, stddev;
    Tensor contrast, hidden, mask;
  };
  nn::Conv reduce, restore;
  double slope = 0.2;

  static ContrastChannelAttention Make(nn::ParamSet& params, const std::string& name, int features,
                                       int reduction, double slope, Rng& rng);
  Tensor Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const;
  Tensor Mask(const nn::ParamSet& params, const Tensor& x) const;
  Tensor Backward(nn::ParamSet& params, const Tensor& dy, const Cache& cache) const;
};

// BSConv -> ConvNeXt -> ESA -> CCA.
struct BcbBlock {
  struct Cache {
    BSConv::Cache bs;
    ConvNeXtBlock::Cache cn;
    SpatialAttention::Cache esa;
    ContrastChannelAttention::Cache cca;
  };
  BSConv bsconv;
  ConvNeXtBlock convnext;
  SpatialAttention esa;
  ContrastChannelAttention cca;

  static BcbBlock Make(nn::ParamSet& params, const std::string& name, const SRConfig& config,
                       double slope, Rng& rng);
  Tensor Forward(const nn::ParamSet& params, const Tensor& x, Cache* cache) const;
  Tensor Backward(nn::ParamSet& params, const Tensor& dy, const Cache& cache) const;
};

// Rearranges [r*r, h, w] into [1, r*h, r*w]:
// out[0, r*i + a, r*j + b] = in[r*a + b, i, j].
Tensor ChannelShuffleUp(const Tensor& x, int factor = 4);
Tensor ChannelShuffleDown(const Tensor& y, int factor = 4);

// Per-slice super-resolution decoder: [2C, h, w] -> [1, 4h, 4w].
class SuperResolutionDecoder {
 public:
  struct Cache {
    Tensor input;
    Tensor shallow;
    std::vector<BcbBlock::Cache> blocks;
    std::vector<Tensor> block_out;
    Tensor concat;
    Tensor fused_sum;  // fuse(concat) + shallow
  };

  SuperResolutionDecoder() = default;
  SuperResolutionDecoder(nn::ParamSet& params, const SRConfig& config, double slope, Rng& rng);

  Tensor ShallowExtract(const nn::ParamSet& params, const Tensor& slice) const;
  Tensor Forward(const nn::ParamSet& params, const Tensor& slice, Cache* cache) const;
  Tensor Backward(nn::ParamSet& params, const Tensor& dout, const Cache& cache) const;

  const std::vector<BcbBlock>& blocks() const { return blocks_; }

 private:
  SRConfig config_;
  nn::Conv shallow_;
  std::vector<BcbBlock> blocks_;
  nn::Conv fuse_;
  nn::Conv head_;
};

}  // namespace fmsc

#endif  // FMSC_SR_DECODER_H_
