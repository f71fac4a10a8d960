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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fmsc/config.h"
#include "fmsc/nn/layers.h"
#include "fmsc/sr_decoder.h"
#include "grad_check.h"
#include "test_util.h"

namespace fmsc {
namespace {

using testing::CheckInputGrads;
using testing::CheckParamGrads;
using testing::Dot;
using testing::RandomTensor;

SRConfig DeskSr() {
  SRConfig c;
  c.in_channels = 8;
  c.features = 16;
  c.num_blocks = 2;
  return c;
}

void Zero(nn::ParamSet& ps, const std::string& prefix) {
  for (auto& p : ps)
    if (p.name.find(prefix) != std::string::npos) std::fill(p.value.begin(), p.value.end(), 0.0);
}

// Checks parameter and input gradients of a module against central
// differences of <forward(x), w>.
template <typename Fwd, typename Bwd>
void CheckModuleGrads(nn::ParamSet& ps, Tensor x, Fwd forward, Bwd backward, uint64_t seed) {
  const Tensor probe = RandomTensor(forward(x).shape(), seed);
  ps.ZeroGrad();
  const Tensor dx = backward(x, probe);
  auto loss = [&] { return Dot(forward(x), probe); };
  const auto rp = CheckParamGrads(ps, loss, 6, seed + 1);
  const auto ri = CheckInputGrads(x, dx, loss, 40, seed + 2);
  INFO("param worst at " << rp.where << ", input worst at " << ri.where);
  CHECK(rp.worst <= 1e-4);
  CHECK(ri.worst <= 1e-4);
}

TEST_CASE("shallow extractor shapes") {
  Rng rng(1);
  nn::ParamSet ps;
  SRConfig full = DeskSr();
  full.in_channels = 64;
  full.features = 48;
  full.num_blocks = 4;
  SuperResolutionDecoder big(ps, full, 0.2, rng);
  CHECK(big.ShallowExtract(ps, RandomTensor({64, 64, 64}, 2)).shape() == Shape{48, 64, 64});

  nn::ParamSet ps2;
  SuperResolutionDecoder small(ps2, DeskSr(), 0.2, rng);
  CHECK(small.ShallowExtract(ps2, RandomTensor({8, 16, 16}, 3)).shape() == Shape{16, 16, 16});
  Zero(ps2, "shallow");
  const Tensor z = small.ShallowExtract(ps2, Tensor({8, 16, 16}));
  CHECK(std::all_of(z.values().begin(), z.values().end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("bsconv parameter count, identity and shape") {
  Rng rng(2);
  nn::ParamSet ps;
  const int f = 16;
  BSConv b = BSConv::Make(ps, "bs", f, rng);
  CHECK(ps.ScalarCount() == static_cast<size_t>(f * f + f + 9 * f + f));

  Zero(ps, "bs");
  auto& pw = ps.at(b.pointwise.weight).value;
  for (int i = 0; i < f; ++i) pw[static_cast<size_t>(i * f + i)] = 1.0;
  auto& dw = ps.at(b.depthwise.weight).value;
  for (int c = 0; c < f; ++c) dw[static_cast<size_t>(c * 9 + 4)] = 1.0;
  const Tensor x = RandomTensor({f, 9, 13}, 3);
  CHECK(b.Forward(ps, x, nullptr) == x);
  CHECK(b.Forward(ps, RandomTensor({f, 5, 31}, 4), nullptr).shape() == Shape{f, 5, 31});
}

TEST_CASE("convnext block: residual identity and gradient") {
  Rng rng(3);
  nn::ParamSet ps;
  ConvNeXtBlock b = ConvNeXtBlock::Make(ps, "cn", 16, rng);
  const Tensor x = RandomTensor({16, 16, 16}, 5);
  CHECK(b.Forward(ps, x, nullptr).shape() == x.shape());

  CheckModuleGrads(
      ps, x, [&](const Tensor& in) { return b.Forward(ps, in, nullptr); },
      [&](const Tensor& in, const Tensor& dy) {
        ConvNeXtBlock::Cache c;
        b.Forward(ps, in, &c);
        return b.Backward(ps, dy, c);
      },
      10);

  Zero(ps, "cn.project");
  CHECK(b.Forward(ps, x, nullptr) == x);
}

TEST_CASE("spatial attention mask bounds") {
  Rng rng(4);
  nn::ParamSet ps;
  SpatialAttention esa = SpatialAttention::Make(ps, "esa", 16, 4, 0.2, rng);
  const Tensor x = RandomTensor({16, 24, 20}, 6, 3.0);
  const Tensor m = esa.Mask(ps, x);
  for (double v : m.values()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  const Tensor y = esa.Forward(ps, x, nullptr);
  for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i]) <= std::abs(x[i]));

  CHECK_FMSC_ERROR(esa.Forward(ps, RandomTensor({16, 4, 4}, 1), nullptr), ErrorKind::kShape);
}

TEST_CASE("spatial attention: spatially constant input gives a constant interior mask") {
  Rng rng(5);
  nn::ParamSet ps;
  SpatialAttention esa = SpatialAttention::Make(ps, "esa", 16, 4, 0.2, rng);
  Tensor x({16, 128, 128});
  for (int64_t c = 0; c < 16; ++c)
    for (int64_t i = 0; i < 128 * 128; ++i) x[c * 128 * 128 + i] = 0.3 * static_cast<double>(c) - 2.0;
  // Zero padding only perturbs a band near the border.
  const Tensor m = esa.Mask(ps, x);
  for (int64_t c = 0; c < 16; ++c) {
    const double ref = m[(c * 128 + 64) * 128 + 64];
    for (int64_t h = 40; h < 88; ++h)
      for (int64_t w = 40; w < 88; ++w) CHECK(m[(c * 128 + h) * 128 + w] == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("spatial attention gradient") {
  Rng rng(6);
  nn::ParamSet ps;
  SpatialAttention esa = SpatialAttention::Make(ps, "esa", 16, 4, 0.2, rng);
  CheckModuleGrads(
      ps, RandomTensor({16, 16, 16}, 7), [&](const Tensor& in) { return esa.Forward(ps, in, nullptr); },
      [&](const Tensor& in, const Tensor& dy) {
        SpatialAttention::Cache c;
        esa.Forward(ps, in, &c);
        return esa.Backward(ps, dy, c);
      },
      20);
}

TEST_CASE("contrast channel attention") {
  Rng rng(7);
  nn::ParamSet ps;
  ContrastChannelAttention cca = ContrastChannelAttention::Make(ps, "cca", 16, 16, 0.2, rng);

  SUBCASE("mask range and per-channel constant input") {
    Tensor x({16, 8, 8});
    for (int64_t c = 0; c < 16; ++c)
      for (int64_t i = 0; i < 64; ++i) x[c * 64 + i] = 0.1 * static_cast<double>(c) - 0.7;
    const Tensor m = cca.Mask(ps, x);
    CHECK(m.size() == 16);
    for (double v : m.values()) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
    const Tensor y = cca.Forward(ps, x, nullptr);
    for (int64_t c = 0; c < 16; ++c)
      for (int64_t i = 0; i < 64; ++i) CHECK(y[c * 64 + i] == doctest::Approx(x[c * 64 + i] * m[c]));
  }
  SUBCASE("mask is invariant to spatial permutation") {
    const Tensor x = RandomTensor({16, 8, 8}, 8);
    std::vector<size_t> perm(64);
    std::iota(perm.begin(), perm.end(), 0);
    Rng r(9);
    for (size_t i = 63; i > 0; --i) std::swap(perm[i], perm[r.Below(i + 1)]);
    Tensor xp(x.shape());
    for (int64_t c = 0; c < 16; ++c)
      for (size_t i = 0; i < 64; ++i) xp[c * 64 + i] = x[c * 64 + perm[i]];
    const Tensor a = cca.Mask(ps, x), b = cca.Mask(ps, xp);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13));
  }
  SUBCASE("gradient") {
    CheckModuleGrads(
        ps, RandomTensor({16, 12, 12}, 10), [&](const Tensor& in) { return cca.Forward(ps, in, nullptr); },
        [&](const Tensor& in, const Tensor& dy) {
          ContrastChannelAttention::Cache c;
          cca.Forward(ps, in, &c);
          return cca.Backward(ps, dy, c);
        },
        30);
  }
}

TEST_CASE("bcb block shape, determinism and gradient") {
  Rng rng(8);
  nn::ParamSet ps;
  BcbBlock b = BcbBlock::Make(ps, "bcb", DeskSr(), 0.2, rng);
  const Tensor x = RandomTensor({16, 16, 16}, 11);
  const Tensor y = b.Forward(ps, x, nullptr);
  CHECK(y.shape() == x.shape());
  CHECK(b.Forward(ps, x, nullptr) == y);
  CheckModuleGrads(
      ps, x, [&](const Tensor& in) { return b.Forward(ps, in, nullptr); },
      [&](const Tensor& in, const Tensor& dy) {
        BcbBlock::Cache c;
        b.Forward(ps, in, &c);
        return b.Backward(ps, dy, c);
      },
      40);
}

TEST_CASE("channel shuffle") {
  const Tensor x = RandomTensor({16, 64, 64}, 12);
  const Tensor y = ChannelShuffleUp(x);
  CHECK(y.shape() == Shape{1, 256, 256});
  CHECK(ChannelShuffleDown(y) == x);
  for (int64_t i : {0, 5, 63})
    for (int64_t j : {0, 17, 63})
      for (int64_t a = 0; a < 4; ++a)
        for (int64_t b = 0; b < 4; ++b) CHECK(y[(4 * i + a) * 256 + 4 * j + b] == x[((4 * a + b) * 64 + i) * 64 + j]);
  std::vector<double> sx = x.values(), sy = y.values();
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());
  CHECK(sx == sy);
  CHECK_FMSC_ERROR(ChannelShuffleUp(RandomTensor({8, 4, 4}, 1)), ErrorKind::kShape);
}

TEST_CASE("sr decoder shapes, slice independence and gradient") {
  Rng rng(9);
  nn::ParamSet ps;
  SuperResolutionDecoder sr(ps, DeskSr(), 0.2, rng);
  const Tensor a = RandomTensor({8, 16, 16}, 13), b = RandomTensor({8, 16, 16}, 14);
  const Tensor ya = sr.Forward(ps, a, nullptr);
  CHECK(ya.shape() == Shape{1, 64, 64});
  CHECK(sr.Forward(ps, b, nullptr) != ya);
  CHECK(sr.Forward(ps, a, nullptr) == ya);

  CheckModuleGrads(
      ps, a, [&](const Tensor& in) { return sr.Forward(ps, in, nullptr); },
      [&](const Tensor& in, const Tensor& dy) {
        SuperResolutionDecoder::Cache c;
        sr.Forward(ps, in, &c);
        return sr.Backward(ps, dy, c);
      },
      50);

  nn::ParamSet ps_full;
  SRConfig full = DeskSr();
  full.in_channels = 64;
  full.features = 48;
  full.num_blocks = 4;
  SuperResolutionDecoder big(ps_full, full, 0.2, rng);
  CHECK(big.Forward(ps_full, RandomTensor({64, 64, 64}, 15), nullptr).shape() == Shape{1, 256, 256});
}

TEST_CASE("sr config validation") {
  SRConfig c = DeskSr();
  c.upscale = 2;
  CHECK_FMSC_ERROR(c.Validate(), ErrorKind::kSpec);
  c = DeskSr();
  c.num_blocks = 0;
  CHECK_FMSC_ERROR(c.Validate(), ErrorKind::kSpec);
  c = DeskSr();
  c.features = 2;
  CHECK_FMSC_ERROR(c.Validate(), ErrorKind::kSpec);
}

}  // namespace
}  // namespace fmsc
