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

#include "fmsc/error_bound.h"
#include "fmsc/random.h"
#include "oracles.h"
#include "test_util.h"

namespace fmsc::eb {
namespace {

PcaBasis IdentityBasis(const BlockDims& b) {
  PcaBasis p;
  p.block = b;
  p.u = Eigen::MatrixXd::Identity(b.d(), b.d());
  p.eigenvalues = Eigen::VectorXd::Ones(b.d());
  return p;
}

Eigen::MatrixXd RandomResiduals(int64_t d, int64_t n, uint64_t seed, bool anisotropic = true) {
  Rng rng(seed);
  Eigen::MatrixXd r(d, n);
  for (int64_t j = 0; j < n; ++j)
    for (int64_t i = 0; i < d; ++i) r(i, j) = rng.Normal() * (anisotropic ? 1.0 + 0.5 * static_cast<double>(i) : 1.0);
  // Mix the axes so the principal directions are not canonical.
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d, d);
  for (int64_t i = 0; i < d; ++i)
    for (int64_t k = 0; k < d; ++k) q(i, k) = rng.Normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
  const Eigen::MatrixXd rot = qr.householderQ();
  return rot * r;
}

double OrthoError(const Eigen::MatrixXd& u) {
  return (u.transpose() * u - Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

TEST_CASE("residual blocks") {
  const data::Dims dims = {8, 64, 64};
  std::vector<double> x(8 * 64 * 64);
  Rng rng(1);
  for (double& v : x) v = rng.Uniform(-1, 1);
  const Eigen::MatrixXd zero = ExtractResidualBlocks(x, x, dims, BlockDims{});
  CHECK(zero.rows() == 256);
  CHECK(zero.cols() == 128);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd blocks = BlockVectors(x, dims, BlockDims{});
  CHECK(UnblockVectors(blocks, dims, BlockDims{}) == x);
  // Block 1 starts at w = 8; its first element is x[0, 0, 8].
  CHECK(blocks(0, 1) == x[8]);
  // Element (t=1, h=0, w=0) of block 0 sits at offset 64.
  CHECK(blocks(64, 0) == x[64 * 64]);

  CHECK_FMSC_ERROR(BlockVectors(std::vector<double>(8 * 60 * 64), {8, 60, 64}, BlockDims{}), ErrorKind::kShape);
}

TEST_CASE("pca of rank-one residuals") {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(16, 40);
  Rng rng(2);
  for (int j = 0; j < 40; ++j) r(0, j) = rng.Normal();
  const PcaBasis b = FitPcaBasis(r, BlockDims{1, 4, 4});
  CHECK(std::abs(std::abs(b.u(0, 0)) - 1.0) < 1e-12);
  for (int i = 1; i < 16; ++i) CHECK(std::abs(b.eigenvalues(i)) < 1e-12);
  CHECK(OrthoError(b.u) <= 1e-10);
}

TEST_CASE("pca matches a Jacobi eigensolver") {
  const int64_t d = 16;
  for (uint64_t seed : {3u, 4u, 5u}) {
    const Eigen::MatrixXd r = RandomResiduals(d, 400, seed);
    const PcaBasis b = FitPcaBasis(r, BlockDims{1, 4, 4});
    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (int64_t i = 0; i < d; ++i)
      for (int64_t k = 0; k < d; ++k) {
        double s = 0.0;
        for (int64_t j = 0; j < r.cols(); ++j) s += r(i, j) * r(k, j);
        cov[i][k] = s / static_cast<double>(r.cols());
      }
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
    testing::JacobiEigen(cov, values, vectors);
    for (int64_t k = 0; k < d; ++k) {
      CHECK(std::abs(b.eigenvalues(k) - values[k]) <= 1e-8 * std::abs(values[k]));
      double dot = 0.0;
      for (int64_t i = 0; i < d; ++i) dot += b.u(i, k) * vectors[i][k];
      CHECK(std::abs(dot) >= 1.0 - 1e-8);
    }
    for (int64_t k = 1; k < d; ++k) CHECK(b.eigenvalues(k) <= b.eigenvalues(k - 1));
    CHECK(OrthoError(b.u) <= 1e-10);
  }
}

TEST_CASE("pca of isotropic and degenerate residuals") {
  const PcaBasis iso = FitPcaBasis(RandomResiduals(16, 20000, 6, false), BlockDims{1, 4, 4});
  CHECK(OrthoError(iso.u) <= 1e-10);
  CHECK(iso.eigenvalues(15) / iso.eigenvalues(0) > 0.8);

  Eigen::MatrixXd two = Eigen::MatrixXd::Zero(256, 3);
  two(5, 0) = 1.0;
  two(9, 1) = -2.0;
  const PcaBasis deg = FitPcaBasis(two, BlockDims{});
  CHECK(deg.u.cols() == 256);
  CHECK(OrthoError(deg.u) <= 1e-10);

  CHECK_FMSC_ERROR(FitPcaBasis(Eigen::MatrixXd::Ones(16, 1), BlockDims{1, 4, 4}), ErrorKind::kData);
}

TEST_CASE("projection") {
  const PcaBasis id = IdentityBasis(BlockDims{1, 2, 4});
  Eigen::VectorXd r = Eigen::VectorXd::Zero(8);
  CHECK(ProjectResidual(r, id).isZero(0));
  r(0) = 3;
  r(1) = 4;
  CHECK(ProjectResidual(r, id) == r);

  const PcaBasis b = FitPcaBasis(RandomResiduals(256, 300, 7), BlockDims{});
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd v(256);
    for (auto& x : v) x = rng.Normal();
    const Eigen::VectorXd c = ProjectResidual(v, b);
    CHECK(std::abs(c.norm() - v.norm()) <= 1e-10 * v.norm());
  }
}

TEST_CASE("greedy selection hand cases") {
  const PcaBasis id = IdentityBasis(BlockDims{1, 1, 2});
  const Eigen::VectorXd r = (Eigen::VectorXd(2) << 3.0, 4.0).finished();
  CHECK(SelectAndQuantize(r, id, 5.0, DefaultStep(5.0, 2)).selected.empty());
  CHECK(SelectAndQuantize(r, id, 6.0, DefaultStep(6.0, 2)).selected.empty());

  const double delta = 1e-3;
  const CorrectionRecord rec = SelectAndQuantize(r, id, 4.0, delta);
  REQUIRE(rec.selected.size() == 1);
  CHECK(rec.selected[0].index == 1);
  CHECK(rec.selected[0].q == 4000);
  const Eigen::VectorXd g = ApplyCorrection(Eigen::VectorXd::Zero(2), rec, id, delta);
  CHECK((r - g).norm() <= 4.0);

  CHECK_FMSC_ERROR(SelectAndQuantize(r, id, 4.0, MaxStep(4.0, 2) * 1.01), ErrorKind::kBudget);
  CHECK_FMSC_ERROR(SelectAndQuantize(r, id, 0.0, 1e-3), ErrorKind::kParameter);
}

TEST_CASE("selection meets the bound exactly and is monotone in tau") {
  const PcaBasis b = FitPcaBasis(RandomResiduals(256, 300, 9), BlockDims{});
  Rng rng(10);
  for (int blk = 0; blk < 40; ++blk) {
    Eigen::VectorXd x(256), xr(256);
    for (int i = 0; i < 256; ++i) {
      x(i) = rng.Uniform(-1, 1);
      xr(i) = x(i) + 0.2 * rng.Normal();
    }
    size_t prev = 0;
    for (double tau : {1e-1, 1e-2, 1e-3}) {
      for (auto order : {SelectionOrder::kMagnitude, SelectionOrder::kEigenvalue}) {
        const double delta = DefaultStep(tau, 256);
        SelectOptions opt;
        opt.order = order;
        const CorrectionRecord rec = SelectAndQuantize(x, xr, b, tau, delta, opt);
        const Eigen::VectorXd g = ApplyCorrection(xr, rec, b, delta);
        CHECK((x - g).norm() <= tau);
        if (order == SelectionOrder::kMagnitude) {
          CHECK(rec.selected.size() >= prev);
          prev = rec.selected.size();
        }
      }
    }
  }
}

TEST_CASE("float32 output mode verifies the stored values") {
  const PcaBasis b = FitPcaBasis(RandomResiduals(256, 300, 11), BlockDims{});
  Rng rng(12);
  Eigen::VectorXd x(256), xr(256);
  for (int i = 0; i < 256; ++i) {
    x(i) = static_cast<float>(rng.Uniform(100, 200));
    xr(i) = x(i) + rng.Normal();
  }
  SelectOptions opt;
  opt.float32_output = true;
  const double tau = 1e-3;
  const CorrectionRecord rec = SelectAndQuantize(x, xr, b, tau, DefaultStep(tau, 256), opt);
  const Eigen::VectorXd g = ApplyCorrection(xr, rec, b, DefaultStep(tau, 256), true);
  for (int i = 0; i < 256; ++i) CHECK(g(i) == static_cast<double>(static_cast<float>(g(i))));
  CHECK((x - g).norm() <= tau);
}

TEST_CASE("apply correction") {
  const PcaBasis id = IdentityBasis(BlockDims{1, 4, 4});
  Rng rng(13);
  Eigen::VectorXd xr(16), x(16);
  for (int i = 0; i < 16; ++i) {
    xr(i) = rng.Uniform(-1, 1);
    x(i) = rng.Uniform(-1, 1);
  }
  CHECK(ApplyCorrection(xr, CorrectionRecord{}, id, 0.1) == xr);

  const double delta = 1e-2;
  CorrectionRecord full;
  for (int i = 0; i < 16; ++i)
    full.selected.push_back({i, static_cast<int32_t>(std::lround((x(i) - xr(i)) / delta))});
  CHECK((ApplyCorrection(xr, full, id, delta) - x).norm() <= delta * 4.0 / 2.0);

  CorrectionRecord bad;
  bad.selected.push_back({16, 1});
  CHECK_FMSC_ERROR(ApplyCorrection(xr, bad, id, delta), ErrorKind::kRecord);
}

TEST_CASE("correction payload round trip") {
  Rng rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    CorrectionPayload p;
    for (auto& b : p.basis_hash) b = static_cast<uint8_t>(rng.Below(256));
    p.delta = rng.Uniform(1e-6, 1.0);
    const size_t blocks = rng.Below(60);
    for (size_t k = 0; k < blocks; ++k) {
      CorrectionRecord rec;
      std::vector<int32_t> idx(256);
      std::iota(idx.begin(), idx.end(), 0);
      const size_t s = rng.Below(20) == 0 ? 256 : rng.Below(12);
      for (size_t i = 0; i < s; ++i) {
        std::swap(idx[i], idx[i + rng.Below(256 - i)]);
        int32_t q = 0;
        while (q == 0)
          q = static_cast<int32_t>(rng.Below(8) == 0 ? rng.Below(2000000) : rng.Below(40)) - 20;
        rec.selected.push_back({idx[i], q});
      }
      p.records.push_back(rec);
    }
    const auto bytes = EncodeCorrection(p, 256);
    const CorrectionPayload back = DecodeCorrection(bytes, 256);
    CHECK(back.basis_hash == p.basis_hash);
    CHECK(back.delta == p.delta);
    CHECK(back.records == p.records);
    if (bytes.size() > 60) {
      std::vector<uint8_t> cut(bytes.begin(), bytes.end() - 5);
      CHECK_FMSC_ERROR(DecodeCorrection(cut, 256), ErrorKind::kCoding);
    }
  }
}

TEST_CASE("empty records cost only their counts") {
  CorrectionPayload p;
  p.delta = 0.5;
  p.records.resize(10);
  const auto bytes = EncodeCorrection(p, 256);
  CHECK(bytes.size() == 32 + 8 + 4 + 2 * 10);
  CHECK(DecodeCorrection(bytes, 256).records == p.records);
}

TEST_CASE("payload grows as tau shrinks") {
  const PcaBasis b = FitPcaBasis(RandomResiduals(256, 300, 15), BlockDims{});
  Rng rng(16);
  std::vector<Eigen::VectorXd> xs, xrs;
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd x(256), xr(256);
    for (int i = 0; i < 256; ++i) {
      x(i) = rng.Uniform(-1, 1);
      xr(i) = x(i) + 0.05 * rng.Normal();
    }
    xs.push_back(x);
    xrs.push_back(xr);
  }
  size_t prev = 0;
  for (double tau : {1e-1, 1e-2, 1e-3}) {
    CorrectionPayload p;
    p.delta = DefaultStep(tau, 256);
    for (size_t k = 0; k < xs.size(); ++k) p.records.push_back(SelectAndQuantize(xs[k], xrs[k], b, tau, p.delta));
    const size_t n = EncodeCorrection(p, 256).size();
    CHECK(n > prev);
    prev = n;
  }
}

TEST_CASE("tau from nrmse") {
  CHECK(TauFromNrmse(1e-3, 1.0, 512) == doctest::Approx(0.022627).epsilon(1e-5));
  CHECK(TauFromNrmse(2e-3, 3.0, 256) == doctest::Approx(2.0 * TauFromNrmse(1e-3, 3.0, 256)));
  CHECK_FMSC_ERROR(TauFromNrmse(0.0, 1.0, 512), ErrorKind::kParameter);
  CHECK_FMSC_ERROR(TauFromNrmse(1e-3, 0.0, 512), ErrorKind::kParameter);
}

TEST_CASE("basis hash tracks content") {
  const PcaBasis a = FitPcaBasis(RandomResiduals(16, 50, 17), BlockDims{1, 4, 4});
  PcaBasis b = a;
  CHECK(a.Hash() == b.Hash());
  b.u(3, 3) += 1e-12;
  CHECK(a.Hash() != b.Hash());
}

}  // namespace
}  // namespace fmsc::eb
