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

#include <array>
#include <cmath>
#include <numbers>

#include "fmsc/entropy.h"
#include "fmsc/error.h"
#include "fmsc/nn/layers.h"

namespace fmsc::entropy {
namespace {

constexpr std::array<int, FactorizedPrior::kStages + 1> kWidths = {1, 3, 3, 3, 1};
constexpr double kInitScale = 10.0;

double SigmoidDerivative(double x) {
  const double s = nn::Sigmoid(x);
  return s * (1.0 - s);
}

}  // namespace

struct FactorizedPrior::Trace {
  // h[k] is the input to stage k (h[0] = x); pre[k] the affine output.
  std::array<std::array<double, 3>, kStages + 1> h{};
  std::array<std::array<double, 3>, kStages> pre{};
};

FactorizedPrior::FactorizedPrior(nn::ParamSet& params, const std::string& name, int channels,
                                 Rng& rng)
    : channels_(channels) {
  const double scale = std::pow(kInitScale, 1.0 / kStages);
  for (int k = 0; k < kStages; ++k) {
    const int rows = kWidths[k + 1], cols = kWidths[k];
    matrix_[k] = params.Add(name + ".matrix" + std::to_string(k), {channels, rows, cols});
    bias_[k] = params.Add(name + ".bias" + std::to_string(k), {channels, rows, 1});
    const double init = std::log(std::expm1(1.0 / scale / rows));
    for (double& v : params.at(matrix_[k]).value) v = init;
    for (double& v : params.at(bias_[k]).value) v = rng.Uniform(-0.5, 0.5);
    if (k < kStages - 1)
      factor_[k] = params.Add(name + ".factor" + std::to_string(k), {channels, rows, 1});
  }
}

double FactorizedPrior::Forward(const nn::ParamSet& params, int channel, double x,
                                Trace* trace) const {
  std::array<double, 3> h{x, 0, 0};
  if (trace) trace->h[0] = h;
  for (int k = 0; k < kStages; ++k) {
    const int rows = kWidths[k + 1], cols = kWidths[k];
    const double* m = params.at(matrix_[k]).value.data() + channel * rows * cols;
    const double* b = params.at(bias_[k]).value.data() + channel * rows;
    std::array<double, 3> next{};
    for (int i = 0; i < rows; ++i) {
      double acc = b[i];
      for (int j = 0; j < cols; ++j) acc += nn::Softplus(m[i * cols + j]) * h[j];
      next[i] = acc;
    }
    if (trace) trace->pre[k] = next;
    if (k < kStages - 1) {
      const double* f = params.at(factor_[k]).value.data() + channel * rows;
      for (int i = 0; i < rows; ++i) next[i] += std::tanh(f[i]) * std::tanh(next[i]);
    }
    h = next;
    if (trace) trace->h[k + 1] = h;
  }
  return h[0];
}

double FactorizedPrior::Backward(nn::ParamSet& params, int channel, const Trace& trace,
                                 double g) const {
  std::array<double, 3> dh{g, 0, 0};
  for (int k = kStages - 1; k >= 0; --k) {
    const int rows = kWidths[k + 1], cols = kWidths[k];
    std::array<double, 3> dpre = dh;
    if (k < kStages - 1) {
      nn::Param& fp = params.at(factor_[k]);
      for (int i = 0; i < rows; ++i) {
        const size_t fi = static_cast<size_t>(channel * rows + i);
        const double tf = std::tanh(fp.value[fi]);
        const double th = std::tanh(trace.pre[k][i]);
        dpre[i] = dh[i] * (1.0 + tf * (1.0 - th * th));
        fp.grad[fi] += dh[i] * th * (1.0 - tf * tf);
      }
    }
    nn::Param& mp = params.at(matrix_[k]);
    nn::Param& bp = params.at(bias_[k]);
    std::array<double, 3> din{};
    for (int i = 0; i < rows; ++i) {
      bp.grad[static_cast<size_t>(channel * rows + i)] += dpre[i];
      for (int j = 0; j < cols; ++j) {
        const size_t mi = static_cast<size_t>(channel * rows * cols + i * cols + j);
        mp.grad[mi] += dpre[i] * trace.h[k][j] * nn::Sigmoid(mp.value[mi]);
        din[j] += dpre[i] * nn::Softplus(mp.value[mi]);
      }
    }
    dh = din;
  }
  return dh[0];
}

double FactorizedPrior::Logit(const nn::ParamSet& params, int channel, double x) const {
  return Forward(params, channel, x, nullptr);
}

double FactorizedPrior::Cdf(const nn::ParamSet& params, int channel, double x) const {
  return nn::Sigmoid(Logit(params, channel, x));
}

double FactorizedPrior::Mass(const nn::ParamSet& params, int channel, double v) const {
  const double lower = Logit(params, channel, v - 0.5);
  const double upper = Logit(params, channel, v + 0.5);
  // Evaluate on the side where the sigmoids are far from saturation.
  const double s = (lower + upper) > 0.0 ? -1.0 : 1.0;
  return std::abs(nn::Sigmoid(s * upper) - nn::Sigmoid(s * lower));
}

BitsResult FactorizedPrior::Bits(const nn::ParamSet& params, const Tensor& z) const {
  Require(z.rank() == 3 && z.dim(0) == channels_, ErrorKind::kShape,
          "factorized prior expects [" + std::to_string(channels_) + ",h,w], got " +
              ShapeString(z.shape()));
  const int64_t plane = z.dim(1) * z.dim(2);
  BitsResult r;
  r.bits.resize(z.size());
  for (int64_t c = 0; c < channels_; ++c)
    for (int64_t i = 0; i < plane; ++i) {
      const size_t idx = static_cast<size_t>(c * plane + i);
      const double p = std::max(Mass(params, static_cast<int>(c), z[idx]), kLikelihoodFloor);
      r.bits[idx] = -std::log2(p);
      r.total += r.bits[idx];
    }
  return r;
}

void FactorizedPrior::BitsBackward(nn::ParamSet& params, const Tensor& z, double scale,
                                   Tensor& dz) const {
  const int64_t plane = z.dim(1) * z.dim(2);
  for (int64_t c = 0; c < channels_; ++c)
    for (int64_t i = 0; i < plane; ++i) {
      const size_t idx = static_cast<size_t>(c * plane + i);
      const int ch = static_cast<int>(c);
      Trace lo, hi;
      const double lower = Forward(params, ch, z[idx] - 0.5, &lo);
      const double upper = Forward(params, ch, z[idx] + 0.5, &hi);
      const double s = (lower + upper) > 0.0 ? -1.0 : 1.0;
      const double p = std::abs(nn::Sigmoid(s * upper) - nn::Sigmoid(s * lower));
      if (p <= kLikelihoodFloor) continue;
      const double g = -scale / (p * std::numbers::ln2);
      // p = sigmoid(upper) - sigmoid(lower) in either evaluation order.
      const double gu = g * SigmoidDerivative(upper);
      const double gl = -g * SigmoidDerivative(lower);
      dz[idx] += Backward(params, ch, hi, gu) + Backward(params, ch, lo, gl);
    }
}

CdfTable FactorizedPrior::Table(const nn::ParamSet& params, int channel, int32_t sym_min,
                                int32_t sym_max) const {
  Require(sym_min <= sym_max, ErrorKind::kTable, "empty symbol range");
  Require(static_cast<int64_t>(sym_max) - sym_min + 1 <= kMaxTableSymbols, ErrorKind::kTable,
          "symbol range exceeds 2^15");
  const int64_t n = static_cast<int64_t>(sym_max) - sym_min + 1;
  std::vector<double> pmf(static_cast<size_t>(n));
  double prev = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double edge = static_cast<double>(sym_min + i) + 0.5;
    const double c = (i == n - 1) ? 1.0 : Cdf(params, channel, edge);
    pmf[i] = c - prev;
    prev = c;
  }
  return QuantizePmf(pmf, sym_min);
}

}  // namespace fmsc::entropy
