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

#include "fmsc/entropy.h"
#include "fmsc/error.h"
#include "fmsc/error_bound.h"

namespace fmsc::eb {
namespace {

// The encoder's verification and the decoder's reconstruction both go
// through these two helpers so the results agree bit for bit.
void Accumulate(Eigen::VectorXd& v, const PcaBasis& basis, int32_t index, double coeff) {
  const double* col = basis.u.col(index).data();
  for (int64_t i = 0; i < v.size(); ++i) v[i] += coeff * col[i];
}

double Output(double v, bool float32) { return float32 ? static_cast<double>(static_cast<float>(v)) : v; }

double ErrorNorm(const Eigen::VectorXd& x, const Eigen::VectorXd& v, bool float32) {
  double s = 0.0;
  for (int64_t i = 0; i < x.size(); ++i) {
    const double e = x[i] - Output(v[i], float32);
    s += e * e;
  }
  return std::sqrt(s);
}

}  // namespace

CorrectionRecord SelectAndQuantize(const Eigen::VectorXd& x, const Eigen::VectorXd& x_r,
                                   const PcaBasis& basis, double tau, double delta,
                                   const SelectOptions& options) {
  const int64_t d = basis.d();
  Require(x.size() == d && x_r.size() == d, ErrorKind::kShape, "block length does not match basis");
  Require(tau > 0, ErrorKind::kParameter, "tau must be positive");
  Require(delta > 0 && delta <= MaxStep(tau, d), ErrorKind::kBudget,
          "step " + std::to_string(delta) + " exceeds tau/(2 sqrt(d)) = " + std::to_string(MaxStep(tau, d)));

  CorrectionRecord rec;
  Eigen::VectorXd v = x_r;
  if (ErrorNorm(x, v, options.float32_output) <= tau) return rec;

  const Eigen::VectorXd c = ProjectResidual(x - x_r, basis);
  std::vector<int32_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  if (options.order == SelectionOrder::kMagnitude)
    std::stable_sort(order.begin(), order.end(),
                     [&](int32_t a, int32_t b) { return std::abs(c[a]) > std::abs(c[b]); });

  for (int32_t i : order) {
    const double q = entropy::RoundHalfAway(c[i] / delta);
    if (q == 0.0) continue;
    Require(std::abs(q) < 2147483647.0, ErrorKind::kBudget, "coefficient too large for step");
    rec.selected.push_back({i, static_cast<int32_t>(q)});
    Accumulate(v, basis, i, delta * q);
    if (ErrorNorm(x, v, options.float32_output) <= tau) return rec;
  }
  Fail(ErrorKind::kBudget, "error bound " + std::to_string(tau) + " unreachable: residual " +
                               std::to_string(ErrorNorm(x, v, options.float32_output)) +
                               " after all coefficients");
}

CorrectionRecord SelectAndQuantize(const Eigen::VectorXd& r, const PcaBasis& basis, double tau,
                                   double delta, const SelectOptions& options) {
  return SelectAndQuantize(r, Eigen::VectorXd::Zero(r.size()), basis, tau, delta, options);
}

Eigen::VectorXd ApplyCorrection(const Eigen::VectorXd& x_r, const CorrectionRecord& rec,
                                const PcaBasis& basis, double delta, bool float32_output) {
  Require(x_r.size() == basis.d(), ErrorKind::kShape, "block length does not match basis");
  Eigen::VectorXd v = x_r;
  for (const Coefficient& co : rec.selected) {
    if (co.index < 0 || co.index >= basis.d())
      Fail(ErrorKind::kRecord, "coefficient index " + std::to_string(co.index) + " out of range");
    Accumulate(v, basis, co.index, delta * static_cast<double>(co.q));
  }
  if (float32_output)
    for (int64_t i = 0; i < v.size(); ++i) v[i] = Output(v[i], true);
  return v;
}

}  // namespace fmsc::eb
