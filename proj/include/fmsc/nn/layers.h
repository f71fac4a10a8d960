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

#ifndef FMSC_NN_LAYERS_H_
#define FMSC_NN_LAYERS_H_

#include <array>
#include <cstddef>
#include <string>

#include "fmsc/nn/params.h"
#include "fmsc/random.h"
#include "fmsc/tensor.h"

namespace fmsc::nn {

using Dim3 = std::array<int, 3>;  // (t, h, w)

// Dense convolution over [C, H, W] (2D, kernel t-extent 1) or [C, T, H, W].
// Transposed layers store weights as [in, out, kt, kh, kw] and produce
// (in - 1) * stride - 2 * pad + kernel + out_pad along each axis.
struct Conv {
  size_t weight = 0;
  size_t bias = 0;
  int in_channels = 0;
  int out_channels = 0;
  Dim3 kernel{1, 1, 1};
  Dim3 stride{1, 1, 1};
  Dim3 pad{0, 0, 0};
  Dim3 out_pad{0, 0, 0};
  bool transposed = false;
};

struct ConvSpec {
  int in_channels;
  int out_channels;
  Dim3 kernel;
  Dim3 stride{1, 1, 1};
  Dim3 pad{0, 0, 0};
  Dim3 out_pad{0, 0, 0};
  bool transposed = false;
};

Conv MakeConv(ParamSet& params, const std::string& name, const ConvSpec& spec, Rng& rng);

// 2D helpers: square kernel k, stride s, "same"-style padding p.
ConvSpec Conv2d(int in, int out, int k, int s = 1, int p = -1);
ConvSpec ConvTranspose2d(int in, int out, int k, int s, int p, int out_pad);
ConvSpec Conv3d(int in, int out, int k, int s, int p);
ConvSpec ConvTranspose3d(int in, int out, int k, int s, int p, int out_pad);

Shape ConvOutputShape(const Conv& conv, const Shape& input);
Tensor ConvForward(const ParamSet& params, const Conv& conv, const Tensor& x);
// Accumulates parameter gradients; returns dL/dx when need_input_grad.
Tensor ConvBackward(ParamSet& params, const Conv& conv, const Tensor& x, const Tensor& dy,
                    bool need_input_grad = true);

// Per-channel k x k convolution on [C, H, W], stride 1, zero "same" padding.
struct DepthwiseConv {
  size_t weight = 0;
  size_t bias = 0;
  int channels = 0;
  int kernel = 3;
};

DepthwiseConv MakeDepthwise(ParamSet& params, const std::string& name, int channels, int kernel,
                            Rng& rng);
Tensor DepthwiseForward(const ParamSet& params, const DepthwiseConv& conv, const Tensor& x);
Tensor DepthwiseBackward(ParamSet& params, const DepthwiseConv& conv, const Tensor& x,
                         const Tensor& dy);

// Elementwise activations. Backward helpers take the forward output (leaky)
// or input (gelu, softplus) and return the incoming gradient scaled in place.
Tensor LeakyRelu(Tensor x, double slope);
void LeakyReluBackward(const Tensor& y, double slope, Tensor& dy);
Tensor Gelu(const Tensor& x);
void GeluBackward(const Tensor& x, Tensor& dy);
double Sigmoid(double v);
double Softplus(double v);

// Max pooling over [C, H, W] without padding; a window larger than the map is
// clipped to the map extent.
struct PoolCache {
  std::vector<size_t> argmax;
  Shape input_shape;
};
Tensor MaxPool2d(const Tensor& x, int kernel, int stride, PoolCache* cache);
Tensor MaxPool2dBackward(const Tensor& dy, const PoolCache& cache);

// Bilinear resize of [C, h, w] to [C, out_h, out_w] using half-pixel centers.
Tensor ResizeBilinear(const Tensor& x, int64_t out_h, int64_t out_w);
Tensor ResizeBilinearBackward(const Tensor& dy, const Shape& input_shape);

}  // namespace fmsc::nn

#endif  // FMSC_NN_LAYERS_H_
