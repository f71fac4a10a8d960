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

#ifndef FMSC_ERROR_BOUND_H_
#define FMSC_ERROR_BOUND_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fmsc/field.h"
#include "fmsc/hash.h"

namespace fmsc::eb {

struct BlockDims {
  int64_t t = 4;
  int64_t h = 8;
  int64_t w = 8;

  int64_t d() const { return t * h * w; }
  friend bool operator==(const BlockDims&, const BlockDims&) = default;
};

struct PcaBasis {
  BlockDims block;
  Eigen::MatrixXd u;            // d x d, orthonormal columns
  Eigen::VectorXd eigenvalues;  // descending

  int64_t d() const { return block.d(); }
  Digest Hash() const;
};

// Residual vectors x - x_r, one column per block, blocks in row-major grid
// order and elements in (t, h, w) order inside a block.
Eigen::MatrixXd ExtractResidualBlocks(std::span<const double> x, std::span<const double> x_r,
                                      const data::Dims& dims, const BlockDims& block);
// Same blocking for a single field.
Eigen::MatrixXd BlockVectors(std::span<const double> values, const data::Dims& dims,
                             const BlockDims& block);
std::vector<double> UnblockVectors(const Eigen::MatrixXd& blocks, const data::Dims& dims,
                                   const BlockDims& block);

PcaBasis FitPcaBasis(const Eigen::MatrixXd& residuals, const BlockDims& block);
Eigen::VectorXd ProjectResidual(const Eigen::VectorXd& r, const PcaBasis& basis);

struct Coefficient {
  int32_t index = 0;
  int32_t q = 0;
  friend bool operator==(const Coefficient&, const Coefficient&) = default;
};

struct CorrectionRecord {
  std::vector<Coefficient> selected;
  friend bool operator==(const CorrectionRecord&, const CorrectionRecord&) = default;
};

enum class SelectionOrder {
  kMagnitude,   // descending |c_i|
  kEigenvalue,  // basis column order
};

struct SelectOptions {
  SelectionOrder order = SelectionOrder::kMagnitude;
  // Verify the bound on float32-rounded outputs, matching what is stored.
  bool float32_output = false;
};

// Largest step for which the bound is reachable with every coefficient kept.
inline double MaxStep(double tau, int64_t d) { return tau / (2.0 * std::sqrt(static_cast<double>(d))); }
// The step used by the codec.
inline double DefaultStep(double tau, int64_t d) { return tau / (4.0 * std::sqrt(static_cast<double>(d))); }

// Greedy selection until ||x - x^G|| <= tau. x_r is the reconstruction.
CorrectionRecord SelectAndQuantize(const Eigen::VectorXd& x, const Eigen::VectorXd& x_r,
                                   const PcaBasis& basis, double tau, double delta,
                                   const SelectOptions& options = {});
// Residual-only form: x = r, x_r = 0.
CorrectionRecord SelectAndQuantize(const Eigen::VectorXd& r, const PcaBasis& basis, double tau,
                                   double delta, const SelectOptions& options = {});

Eigen::VectorXd ApplyCorrection(const Eigen::VectorXd& x_r, const CorrectionRecord& rec,
                                const PcaBasis& basis, double delta, bool float32_output = false);

struct CorrectionPayload {
  Digest basis_hash{};
  double delta = 0.0;
  std::vector<CorrectionRecord> records;
};

std::vector<uint8_t> EncodeCorrection(const CorrectionPayload& payload, int64_t d);
CorrectionPayload DecodeCorrection(std::span<const uint8_t> bytes, int64_t d);

double TauFromNrmse(double eps, double range, int64_t block_elements);

}  // namespace fmsc::eb

#endif  // FMSC_ERROR_BOUND_H_
