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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fmsc/bytes.h"
#include "fmsc/error.h"
#include "fmsc/error_bound.h"

namespace fmsc::eb {
namespace {

void CheckBlocking(const data::Dims& dims, const BlockDims& b) {
  Require(b.t > 0 && b.h > 0 && b.w > 0, ErrorKind::kShape, "block dims must be positive");
  Require(dims[0] % b.t == 0 && dims[1] % b.h == 0 && dims[2] % b.w == 0, ErrorKind::kShape,
          "field " + data::DimsString(dims) + " is not divisible by block [" + std::to_string(b.t) +
              "," + std::to_string(b.h) + "," + std::to_string(b.w) + "]");
}

template <typename Fn>
void ForEachBlockElement(const data::Dims& dims, const BlockDims& b, Fn&& fn) {
  int64_t col = 0;
  for (int64_t t0 = 0; t0 < dims[0]; t0 += b.t)
    for (int64_t h0 = 0; h0 < dims[1]; h0 += b.h)
      for (int64_t w0 = 0; w0 < dims[2]; w0 += b.w, ++col) {
        int64_t row = 0;
        for (int64_t t = t0; t < t0 + b.t; ++t)
          for (int64_t h = h0; h < h0 + b.h; ++h) {
            const int64_t base = (t * dims[1] + h) * dims[2];
            for (int64_t w = w0; w < w0 + b.w; ++w) fn(row++, col, base + w);
          }
      }
}

}  // namespace

Eigen::MatrixXd BlockVectors(std::span<const double> values, const data::Dims& dims,
                             const BlockDims& block) {
  CheckBlocking(dims, block);
  Require(static_cast<int64_t>(values.size()) == data::DimsNumel(dims), ErrorKind::kShape,
          "value count does not match " + data::DimsString(dims));
  Eigen::MatrixXd out(block.d(), data::DimsNumel(dims) / block.d());
  ForEachBlockElement(dims, block, [&](int64_t r, int64_t c, int64_t i) { out(r, c) = values[i]; });
  return out;
}

std::vector<double> UnblockVectors(const Eigen::MatrixXd& blocks, const data::Dims& dims,
                                   const BlockDims& block) {
  CheckBlocking(dims, block);
  Require(blocks.rows() == block.d() && blocks.cols() == data::DimsNumel(dims) / block.d(),
          ErrorKind::kShape, "block matrix does not match field dims");
  std::vector<double> out(data::DimsNumel(dims));
  ForEachBlockElement(dims, block, [&](int64_t r, int64_t c, int64_t i) { out[i] = blocks(r, c); });
  return out;
}

Eigen::MatrixXd ExtractResidualBlocks(std::span<const double> x, std::span<const double> x_r,
                                      const data::Dims& dims, const BlockDims& block) {
  Require(x.size() == x_r.size(), ErrorKind::kShape, "original and reconstruction differ in size");
  return BlockVectors(x, dims, block) - BlockVectors(x_r, dims, block);
}

Digest PcaBasis::Hash() const {
  ByteWriter w;
  w.Put<int64_t>(block.t);
  w.Put<int64_t>(block.h);
  w.Put<int64_t>(block.w);
  for (int64_t j = 0; j < u.cols(); ++j)
    for (int64_t i = 0; i < u.rows(); ++i) w.Put<double>(u(i, j));
  for (int64_t i = 0; i < eigenvalues.size(); ++i) w.Put<double>(eigenvalues[i]);
  return Sha256(w.bytes());
}

PcaBasis FitPcaBasis(const Eigen::MatrixXd& residuals, const BlockDims& block) {
  const int64_t d = block.d();
  Require(residuals.rows() == d, ErrorKind::kShape,
          "residual vectors have length " + std::to_string(residuals.rows()) + ", expected " +
              std::to_string(d));
  Require(residuals.cols() >= 2, ErrorKind::kData, "PCA needs at least two residual vectors");
  Require(residuals.allFinite(), ErrorKind::kData, "non-finite residuals");

  const Eigen::MatrixXd cov = residuals * residuals.transpose() / static_cast<double>(residuals.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  Require(solver.info() == Eigen::Success, ErrorKind::kData, "eigendecomposition failed");

  PcaBasis basis;
  basis.block = block;
  basis.u.resize(d, d);
  basis.eigenvalues.resize(d);
  const double top = std::max(solver.eigenvalues()[d - 1], 0.0);
  const double tol = top * 1e-12 * static_cast<double>(d);
  int64_t kept = 0;
  for (int64_t k = d - 1; k >= 0; --k) {
    const double lambda = solver.eigenvalues()[k];
    if (!(lambda > tol)) break;
    Eigen::VectorXd v = solver.eigenvectors().col(k);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    basis.u.col(kept) = v;
    basis.eigenvalues[kept] = lambda;
    ++kept;
  }
  // Complete the null space from canonical vectors.
  for (int64_t e = 0; e < d && kept < d; ++e) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(d, e);
    for (int pass = 0; pass < 2; ++pass)
      for (int64_t j = 0; j < kept; ++j) v -= basis.u.col(j).dot(v) * basis.u.col(j);
    const double n = v.norm();
    if (n < 1e-6) continue;
    basis.u.col(kept) = v / n;
    basis.eigenvalues[kept] = 0.0;
    ++kept;
  }
  Require(kept == d, ErrorKind::kData, "could not complete orthonormal basis");
  return basis;
}

Eigen::VectorXd ProjectResidual(const Eigen::VectorXd& r, const PcaBasis& basis) {
  Require(r.size() == basis.d(), ErrorKind::kShape, "residual length does not match basis");
  return basis.u.transpose() * r;
}

double TauFromNrmse(double eps, double range, int64_t block_elements) {
  Require(eps > 0 && std::isfinite(eps), ErrorKind::kParameter, "target NRMSE must be positive");
  Require(range > 0 && std::isfinite(range), ErrorKind::kParameter, "range must be positive");
  Require(block_elements >= 1, ErrorKind::kParameter, "block must hold at least one element");
  return eps * range * std::sqrt(static_cast<double>(block_elements));
}

}  // namespace fmsc::eb
