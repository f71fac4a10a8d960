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

#include "fmsc/nn/layers.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "fmsc/error.h"

namespace fmsc::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

struct Dims4 {
  int64_t c, t, h, w;
};

Dims4 AsDims4(const Shape& s) {
  if (s.size() == 3) return {s[0], 1, s[1], s[2]};
  Require(s.size() == 4, ErrorKind::kShape, "expected [C,H,W] or [C,T,H,W], got " + ShapeString(s));
  return {s[0], s[1], s[2], s[3]};
}

Shape FromDims4(const Dims4& d, int rank) {
  if (rank == 3) return {d.c, d.h, d.w};
  return {d.c, d.t, d.h, d.w};
}

// Image side [channels, t, h, w]; column side positions [ot, oh, ow].
struct Geometry {
  int64_t channels, t, h, w;
  int64_t ot, oh, ow;
  Dim3 k, s, p;

  int64_t rows() const { return channels * k[0] * k[1] * k[2]; }
  int64_t cols() const { return ot * oh * ow; }
};

void Im2Col(const double* img, const Geometry& g, double* col) {
  const int64_t positions = g.cols();
  int64_t row = 0;
  for (int64_t c = 0; c < g.channels; ++c) {
    for (int kt = 0; kt < g.k[0]; ++kt) {
      for (int kh = 0; kh < g.k[1]; ++kh) {
        for (int kw = 0; kw < g.k[2]; ++kw, ++row) {
          double* dst = col + row * positions;
          for (int64_t ot = 0; ot < g.ot; ++ot) {
            const int64_t it = ot * g.s[0] - g.p[0] + kt;
            if (it < 0 || it >= g.t) {
              std::fill_n(dst, g.oh * g.ow, 0.0);
              dst += g.oh * g.ow;
              continue;
            }
            for (int64_t oh = 0; oh < g.oh; ++oh, dst += g.ow) {
              const int64_t ih = oh * g.s[1] - g.p[1] + kh;
              if (ih < 0 || ih >= g.h) {
                std::fill_n(dst, g.ow, 0.0);
                continue;
              }
              const double* src = img + ((c * g.t + it) * g.h + ih) * g.w;
              for (int64_t ow = 0; ow < g.ow; ++ow) {
                const int64_t iw = ow * g.s[2] - g.p[2] + kw;
                dst[ow] = (iw >= 0 && iw < g.w) ? src[iw] : 0.0;
              }
            }
          }
        }
      }
    }
  }
}

// Accumulates columns back into a zero-initialised image.
void Col2Im(const double* col, const Geometry& g, double* img) {
  const int64_t positions = g.cols();
  int64_t row = 0;
  for (int64_t c = 0; c < g.channels; ++c) {
    for (int kt = 0; kt < g.k[0]; ++kt) {
      for (int kh = 0; kh < g.k[1]; ++kh) {
        for (int kw = 0; kw < g.k[2]; ++kw, ++row) {
          const double* src = col + row * positions;
          for (int64_t ot = 0; ot < g.ot; ++ot) {
            const int64_t it = ot * g.s[0] - g.p[0] + kt;
            if (it < 0 || it >= g.t) {
              src += g.oh * g.ow;
              continue;
            }
            for (int64_t oh = 0; oh < g.oh; ++oh, src += g.ow) {
              const int64_t ih = oh * g.s[1] - g.p[1] + kh;
              if (ih < 0 || ih >= g.h) continue;
              double* dst = img + ((c * g.t + it) * g.h + ih) * g.w;
              for (int64_t ow = 0; ow < g.ow; ++ow) {
                const int64_t iw = ow * g.s[2] - g.p[2] + kw;
                if (iw >= 0 && iw < g.w) dst[iw] += src[ow];
              }
            }
          }
        }
      }
    }
  }
}

bool IsPointwise(const Conv& c) {
  return !c.transposed && c.kernel == Dim3{1, 1, 1} && c.stride == Dim3{1, 1, 1} &&
         c.pad == Dim3{0, 0, 0};
}

int64_t ConvOut(int64_t in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }
int64_t ConvTOut(int64_t in, int k, int s, int p, int op) { return (in - 1) * s - 2 * p + k + op; }

Dims4 OutputDims(const Conv& conv, const Dims4& in, int rank) {
  Require(in.c == conv.in_channels, ErrorKind::kShape,
          "conv expects " + std::to_string(conv.in_channels) + " input channels, got " +
              std::to_string(in.c));
  if (rank == 3)
    Require(conv.kernel[0] == 1 && conv.stride[0] == 1 && conv.pad[0] == 0, ErrorKind::kShape,
            "3D kernel applied to a 2D feature map");
  Dims4 out{conv.out_channels, 0, 0, 0};
  int64_t* od[3] = {&out.t, &out.h, &out.w};
  const int64_t id[3] = {in.t, in.h, in.w};
  for (int a = 0; a < 3; ++a) {
    *od[a] = conv.transposed
                 ? ConvTOut(id[a], conv.kernel[a], conv.stride[a], conv.pad[a], conv.out_pad[a])
                 : ConvOut(id[a], conv.kernel[a], conv.stride[a], conv.pad[a]);
    Require(*od[a] >= 1 && id[a] + 2 * conv.pad[a] >= (conv.transposed ? 0 : conv.kernel[a]),
            ErrorKind::kShape, "input too small for convolution kernel");
  }
  return out;
}

}  // namespace

ConvSpec Conv2d(int in, int out, int k, int s, int p) {
  if (p < 0) p = k / 2;
  return ConvSpec{in, out, {1, k, k}, {1, s, s}, {0, p, p}};
}

ConvSpec ConvTranspose2d(int in, int out, int k, int s, int p, int out_pad) {
  return ConvSpec{in, out, {1, k, k}, {1, s, s}, {0, p, p}, {0, out_pad, out_pad}, true};
}

ConvSpec Conv3d(int in, int out, int k, int s, int p) {
  return ConvSpec{in, out, {k, k, k}, {s, s, s}, {p, p, p}};
}

ConvSpec ConvTranspose3d(int in, int out, int k, int s, int p, int out_pad) {
  return ConvSpec{in, out, {k, k, k}, {s, s, s}, {p, p, p}, {out_pad, out_pad, out_pad}, true};
}

Conv MakeConv(ParamSet& params, const std::string& name, const ConvSpec& spec, Rng& rng) {
  Conv c;
  c.in_channels = spec.in_channels;
  c.out_channels = spec.out_channels;
  c.kernel = spec.kernel;
  c.stride = spec.stride;
  c.pad = spec.pad;
  c.out_pad = spec.out_pad;
  c.transposed = spec.transposed;
  const int64_t taps = int64_t{spec.kernel[0]} * spec.kernel[1] * spec.kernel[2];
  Shape wshape = spec.transposed
                     ? Shape{spec.in_channels, spec.out_channels, spec.kernel[0], spec.kernel[1],
                             spec.kernel[2]}
                     : Shape{spec.out_channels, spec.in_channels, spec.kernel[0], spec.kernel[1],
                             spec.kernel[2]};
  c.weight = params.Add(name + ".weight", wshape);
  c.bias = params.Add(name + ".bias", {spec.out_channels});
  const double fan_in = static_cast<double>((spec.transposed ? spec.out_channels : spec.in_channels) * taps);
  const double bound = 1.0 / std::sqrt(fan_in);
  for (double& v : params.at(c.weight).value) v = rng.Uniform(-bound, bound);
  for (double& v : params.at(c.bias).value) v = rng.Uniform(-bound, bound);
  return c;
}

Shape ConvOutputShape(const Conv& conv, const Shape& input) {
  return FromDims4(OutputDims(conv, AsDims4(input), static_cast<int>(input.size())),
                   static_cast<int>(input.size()));
}

Tensor ConvForward(const ParamSet& params, const Conv& conv, const Tensor& x) {
  const Dims4 in = AsDims4(x.shape());
  const Dims4 out = OutputDims(conv, in, x.rank());
  Tensor y(FromDims4(out, x.rank()));
  const double* w = params.at(conv.weight).value.data();
  const double* b = params.at(conv.bias).value.data();
  const int64_t taps = int64_t{conv.kernel[0]} * conv.kernel[1] * conv.kernel[2];

  if (!conv.transposed) {
    const Geometry g{in.c, in.t, in.h, in.w, out.t, out.h, out.w, conv.kernel, conv.stride, conv.pad};
    const int64_t k = g.rows(), p = g.cols();
    std::vector<double> col_storage;
    const double* col = x.data();
    if (!IsPointwise(conv)) {
      col_storage.resize(static_cast<size_t>(k * p));
      Im2Col(x.data(), g, col_storage.data());
      col = col_storage.data();
    }
    MapMat(y.data(), out.c, p).noalias() = ConstMapMat(w, out.c, k) * ConstMapMat(col, k, p);
    for (int64_t c = 0; c < out.c; ++c) {
      double* row = y.data() + c * p;
      for (int64_t i = 0; i < p; ++i) row[i] += b[c];
    }
    return y;
  }

  // Transposed: the image side is the output.
  const Geometry g{out.c, out.t, out.h, out.w, in.t, in.h, in.w, conv.kernel, conv.stride, conv.pad};
  const int64_t rows = out.c * taps, p = g.cols();
  std::vector<double> col(static_cast<size_t>(rows * p));
  MapMat(col.data(), rows, p).noalias() =
      ConstMapMat(w, in.c, rows).transpose() * ConstMapMat(x.data(), in.c, p);
  Col2Im(col.data(), g, y.data());
  const int64_t plane = out.t * out.h * out.w;
  for (int64_t c = 0; c < out.c; ++c) {
    double* row = y.data() + c * plane;
    for (int64_t i = 0; i < plane; ++i) row[i] += b[c];
  }
  return y;
}

Tensor ConvBackward(ParamSet& params, const Conv& conv, const Tensor& x, const Tensor& dy,
                    bool need_input_grad) {
  const Dims4 in = AsDims4(x.shape());
  const Dims4 out = OutputDims(conv, in, x.rank());
  Require(dy.shape() == FromDims4(out, x.rank()), ErrorKind::kShape, "conv gradient shape mismatch");
  Param& wp = params.at(conv.weight);
  Param& bp = params.at(conv.bias);
  const int64_t taps = int64_t{conv.kernel[0]} * conv.kernel[1] * conv.kernel[2];
  const int64_t out_plane = out.t * out.h * out.w;
  for (int64_t c = 0; c < out.c; ++c) {
    const double* row = dy.data() + c * out_plane;
    double s = 0.0;
    for (int64_t i = 0; i < out_plane; ++i) s += row[i];
    bp.grad[c] += s;
  }

  Tensor dx;
  if (!conv.transposed) {
    const Geometry g{in.c, in.t, in.h, in.w, out.t, out.h, out.w, conv.kernel, conv.stride, conv.pad};
    const int64_t k = g.rows(), p = g.cols();
    std::vector<double> col_storage;
    const double* col = x.data();
    const bool pointwise = IsPointwise(conv);
    if (!pointwise) {
      col_storage.resize(static_cast<size_t>(k * p));
      Im2Col(x.data(), g, col_storage.data());
      col = col_storage.data();
    }
    ConstMapMat dym(dy.data(), out.c, p);
    MapMat(wp.grad.data(), out.c, k).noalias() += dym * ConstMapMat(col, k, p).transpose();
    if (!need_input_grad) return dx;
    dx = Tensor(x.shape());
    if (pointwise) {
      MapMat(dx.data(), k, p).noalias() = ConstMapMat(wp.value.data(), out.c, k).transpose() * dym;
    } else {
      std::vector<double> dcol(static_cast<size_t>(k * p));
      MapMat(dcol.data(), k, p).noalias() =
          ConstMapMat(wp.value.data(), out.c, k).transpose() * dym;
      Col2Im(dcol.data(), g, dx.data());
    }
    return dx;
  }

  const Geometry g{out.c, out.t, out.h, out.w, in.t, in.h, in.w, conv.kernel, conv.stride, conv.pad};
  const int64_t rows = out.c * taps, p = g.cols();
  std::vector<double> dcol(static_cast<size_t>(rows * p));
  Im2Col(dy.data(), g, dcol.data());
  ConstMapMat dcolm(dcol.data(), rows, p);
  ConstMapMat xm(x.data(), in.c, p);
  MapMat(wp.grad.data(), in.c, rows).noalias() += xm * dcolm.transpose();
  if (!need_input_grad) return dx;
  dx = Tensor(x.shape());
  MapMat(dx.data(), in.c, p).noalias() = ConstMapMat(wp.value.data(), in.c, rows) * dcolm;
  return dx;
}

DepthwiseConv MakeDepthwise(ParamSet& params, const std::string& name, int channels, int kernel,
                            Rng& rng) {
  DepthwiseConv d;
  d.channels = channels;
  d.kernel = kernel;
  d.weight = params.Add(name + ".weight", {channels, 1, kernel, kernel});
  d.bias = params.Add(name + ".bias", {channels});
  const double bound = 1.0 / kernel;
  for (double& v : params.at(d.weight).value) v = rng.Uniform(-bound, bound);
  for (double& v : params.at(d.bias).value) v = rng.Uniform(-bound, bound);
  return d;
}

Tensor DepthwiseForward(const ParamSet& params, const DepthwiseConv& conv, const Tensor& x) {
  Require(x.rank() == 3 && x.dim(0) == conv.channels, ErrorKind::kShape,
          "depthwise conv expects [" + std::to_string(conv.channels) + ",H,W], got " +
              ShapeString(x.shape()));
  const int64_t h = x.dim(1), w = x.dim(2), k = conv.kernel, r = k / 2;
  const double* wt = params.at(conv.weight).value.data();
  const double* b = params.at(conv.bias).value.data();
  Tensor y(x.shape());
  for (int64_t c = 0; c < conv.channels; ++c) {
    const double* src = x.data() + c * h * w;
    double* dst = y.data() + c * h * w;
    std::fill_n(dst, h * w, b[c]);
    for (int64_t a = 0; a < k; ++a) {
      const int64_t i0 = std::max<int64_t>(0, r - a), i1 = std::min<int64_t>(h, h + r - a);
      for (int64_t bb = 0; bb < k; ++bb) {
        const double wv = wt[(c * k + a) * k + bb];
        const int64_t j0 = std::max<int64_t>(0, r - bb), j1 = std::min<int64_t>(w, w + r - bb);
        for (int64_t i = i0; i < i1; ++i) {
          const double* s = src + (i + a - r) * w + (bb - r);
          double* d = dst + i * w;
          for (int64_t j = j0; j < j1; ++j) d[j] += wv * s[j];
        }
      }
    }
  }
  return y;
}

Tensor DepthwiseBackward(ParamSet& params, const DepthwiseConv& conv, const Tensor& x,
                         const Tensor& dy) {
  const int64_t h = x.dim(1), w = x.dim(2), k = conv.kernel, r = k / 2;
  Param& wp = params.at(conv.weight);
  Param& bp = params.at(conv.bias);
  Tensor dx(x.shape());
  for (int64_t c = 0; c < conv.channels; ++c) {
    const double* src = x.data() + c * h * w;
    const double* g = dy.data() + c * h * w;
    double* dsrc = dx.data() + c * h * w;
    double bs = 0.0;
    for (int64_t i = 0; i < h * w; ++i) bs += g[i];
    bp.grad[c] += bs;
    for (int64_t a = 0; a < k; ++a) {
      const int64_t i0 = std::max<int64_t>(0, r - a), i1 = std::min<int64_t>(h, h + r - a);
      for (int64_t bb = 0; bb < k; ++bb) {
        const size_t widx = static_cast<size_t>((c * k + a) * k + bb);
        const double wv = wp.value[widx];
        const int64_t j0 = std::max<int64_t>(0, r - bb), j1 = std::min<int64_t>(w, w + r - bb);
        double acc = 0.0;
        for (int64_t i = i0; i < i1; ++i) {
          const int64_t off = (i + a - r) * w + (bb - r);
          const double* s = src + off;
          double* ds = dsrc + off;
          const double* gg = g + i * w;
          for (int64_t j = j0; j < j1; ++j) {
            acc += gg[j] * s[j];
            ds[j] += wv * gg[j];
          }
        }
        wp.grad[widx] += acc;
      }
    }
  }
  return dx;
}

Tensor LeakyRelu(Tensor x, double slope) {
  for (double& v : x.values())
    if (v < 0.0) v *= slope;
  return x;
}

void LeakyReluBackward(const Tensor& y, double slope, Tensor& dy) {
  for (size_t i = 0; i < y.size(); ++i)
    if (y[i] < 0.0) dy[i] *= slope;
}

Tensor Gelu(const Tensor& x) {
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i)
    y[i] = 0.5 * x[i] * (1.0 + std::erf(x[i] * std::numbers::sqrt2 / 2.0));
  return y;
}

void GeluBackward(const Tensor& x, Tensor& dy) {
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
    dy[i] *= cdf + v * pdf;
  }
}

double Sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

double Softplus(double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); }

Tensor MaxPool2d(const Tensor& x, int kernel, int stride, PoolCache* cache) {
  Require(x.rank() == 3, ErrorKind::kShape, "max pool expects [C,H,W]");
  const int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int64_t kh = std::min<int64_t>(kernel, h), kw = std::min<int64_t>(kernel, w);
  const int64_t oh = (h - kh) / stride + 1, ow = (w - kw) / stride + 1;
  Tensor y({c, oh, ow});
  if (cache) {
    cache->argmax.assign(y.size(), 0);
    cache->input_shape = x.shape();
  }
  size_t o = 0;
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int64_t i = 0; i < oh; ++i) {
      for (int64_t j = 0; j < ow; ++j, ++o) {
        size_t best = static_cast<size_t>((ch * h + i * stride) * w + j * stride);
        for (int64_t a = 0; a < kh; ++a)
          for (int64_t b = 0; b < kw; ++b) {
            const size_t idx = static_cast<size_t>((ch * h + i * stride + a) * w + j * stride + b);
            if (x[idx] > x[best]) best = idx;
          }
        y[o] = x[best];
        if (cache) cache->argmax[o] = best;
      }
    }
  }
  return y;
}

Tensor MaxPool2dBackward(const Tensor& dy, const PoolCache& cache) {
  Tensor dx(cache.input_shape);
  for (size_t o = 0; o < dy.size(); ++o) dx[cache.argmax[o]] += dy[o];
  return dx;
}

namespace {

struct Taps {
  std::vector<int64_t> lo, hi;
  std::vector<double> frac;
};

Taps ResizeTaps(int64_t in, int64_t out) {
  Taps t;
  t.lo.resize(out);
  t.hi.resize(out);
  t.frac.resize(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (int64_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    int64_t i0 = static_cast<int64_t>(std::floor(src));
    if (i0 > in - 1) i0 = in - 1;
    t.lo[o] = i0;
    t.hi[o] = std::min(i0 + 1, in - 1);
    t.frac[o] = src - static_cast<double>(i0);
  }
  return t;
}

}  // namespace

Tensor ResizeBilinear(const Tensor& x, int64_t out_h, int64_t out_w) {
  const int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const Taps th = ResizeTaps(h, out_h), tw = ResizeTaps(w, out_w);
  Tensor y({c, out_h, out_w});
  for (int64_t ch = 0; ch < c; ++ch) {
    const double* src = x.data() + ch * h * w;
    double* dst = y.data() + ch * out_h * out_w;
    for (int64_t i = 0; i < out_h; ++i) {
      const double fy = th.frac[i];
      const double* r0 = src + th.lo[i] * w;
      const double* r1 = src + th.hi[i] * w;
      for (int64_t j = 0; j < out_w; ++j) {
        const double fx = tw.frac[j];
        const double top = (1 - fx) * r0[tw.lo[j]] + fx * r0[tw.hi[j]];
        const double bot = (1 - fx) * r1[tw.lo[j]] + fx * r1[tw.hi[j]];
        dst[i * out_w + j] = (1 - fy) * top + fy * bot;
      }
    }
  }
  return y;
}

Tensor ResizeBilinearBackward(const Tensor& dy, const Shape& input_shape) {
  const int64_t c = input_shape[0], h = input_shape[1], w = input_shape[2];
  const int64_t out_h = dy.dim(1), out_w = dy.dim(2);
  const Taps th = ResizeTaps(h, out_h), tw = ResizeTaps(w, out_w);
  Tensor dx(input_shape);
  for (int64_t ch = 0; ch < c; ++ch) {
    double* dst = dx.data() + ch * h * w;
    const double* g = dy.data() + ch * out_h * out_w;
    for (int64_t i = 0; i < out_h; ++i) {
      const double fy = th.frac[i];
      double* r0 = dst + th.lo[i] * w;
      double* r1 = dst + th.hi[i] * w;
      for (int64_t j = 0; j < out_w; ++j) {
        const double fx = tw.frac[j];
        const double v = g[i * out_w + j];
        r0[tw.lo[j]] += (1 - fy) * (1 - fx) * v;
        r0[tw.hi[j]] += (1 - fy) * fx * v;
        r1[tw.lo[j]] += fy * (1 - fx) * v;
        r1[tw.hi[j]] += fy * fx * v;
      }
    }
  }
  return dx;
}

}  // namespace fmsc::nn
