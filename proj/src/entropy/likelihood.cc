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
#include <numbers>

#include "fmsc/entropy.h"
#include "fmsc/error.h"

namespace fmsc::entropy {
namespace {

double NormalPdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

void CheckSizes(size_t a, size_t b, size_t c) {
  Require(a == b && b == c, ErrorKind::kShape, "likelihood inputs must have equal length");
}

}  // namespace

double RoundHalfAway(double v) { return std::round(v); }

std::vector<int32_t> QuantizeRound(std::span<const double> values) {
  std::vector<int32_t> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v)) Fail(ErrorKind::kData, "non-finite value at index " + std::to_string(i));
    const double r = RoundHalfAway(v);
    if (!(r >= INT32_MIN && r <= INT32_MAX))
      Fail(ErrorKind::kData, "value out of integer range at index " + std::to_string(i));
    out[i] = static_cast<int32_t>(r);
  }
  return out;
}

std::vector<double> AddUniformNoise(std::span<const double> values, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    Require(std::isfinite(values[i]), ErrorKind::kData, "non-finite value before noise");
    double u = rng.Uniform() - 0.5;
    if (u == -0.5) u = 0.0;  // keep the support open
    out[i] = values[i] + u;
  }
  return out;
}

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double GaussianMass(double value, double mu, double sigma) {
  const double v = std::abs(value - mu);
  return NormalCdf((0.5 - v) / sigma) - NormalCdf((-0.5 - v) / sigma);
}

BitsResult GaussianLikelihoodBits(std::span<const double> values, std::span<const double> mu,
                                  std::span<const double> sigma) {
  CheckSizes(values.size(), mu.size(), sigma.size());
  BitsResult r;
  r.bits.resize(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    if (!(sigma[i] >= 1e-6)) Fail(ErrorKind::kParameter, "sigma below floor at index " + std::to_string(i));
    const double p = std::max(GaussianMass(values[i], mu[i], sigma[i]), kLikelihoodFloor);
    r.bits[i] = -std::log2(p);
    r.total += r.bits[i];
  }
  return r;
}

void GaussianLikelihoodBitsBackward(std::span<const double> values, std::span<const double> mu,
                                    std::span<const double> sigma, double scale,
                                    std::span<double> dvalues, std::span<double> dmu,
                                    std::span<double> dsigma) {
  CheckSizes(values.size(), mu.size(), sigma.size());
  for (size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mu[i];
    const double v = std::abs(d);
    const double s = sigma[i];
    const double upper = (0.5 - v) / s, lower = (-0.5 - v) / s;
    const double p = NormalCdf(upper) - NormalCdf(lower);
    if (p <= kLikelihoodFloor) continue;  // floored: flat
    const double dbits_dp = -1.0 / (p * std::numbers::ln2);
    const double pu = NormalPdf(upper), pl = NormalPdf(lower);
    const double dp_dv = (pl - pu) / s;
    const double dp_ds = -(pu * upper - pl * lower) / s;
    const double sign = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
    const double g = scale * dbits_dp;
    dvalues[i] += g * dp_dv * sign;
    dmu[i] -= g * dp_dv * sign;
    dsigma[i] += g * dp_ds;
  }
}

double EstimateRate(double y_bits, double z_bits) {
  Require(y_bits >= 0 && z_bits >= 0, ErrorKind::kParameter, "rates must be non-negative");
  return y_bits + z_bits;
}

uint32_t CdfTable::Frequency(int32_t symbol) const {
  const size_t i = static_cast<size_t>(symbol - sym_min);
  return cum[i + 1] - cum[i];
}

double CdfTable::Bits(int32_t symbol) const {
  return -std::log2(static_cast<double>(Frequency(symbol)) / kProbabilityTotal);
}

CdfTable QuantizePmf(std::span<const double> pmf, int32_t sym_min) {
  const int64_t n = static_cast<int64_t>(pmf.size());
  Require(n >= 1, ErrorKind::kTable, "empty probability table");
  Require(n <= kMaxTableSymbols, ErrorKind::kTable,
          "symbol range of " + std::to_string(n) + " exceeds 2^15");
  double sum = 0.0;
  for (double p : pmf) sum += std::max(p, 0.0);
  const uint32_t spare = kProbabilityTotal - static_cast<uint32_t>(n);
  std::vector<uint32_t> freq(static_cast<size_t>(n));
  uint64_t used = 0;
  size_t best = 0;
  for (int64_t i = 0; i < n; ++i) {
    const double p = sum > 0.0 ? std::max(pmf[i], 0.0) / sum : 1.0 / static_cast<double>(n);
    const uint32_t extra = std::min<uint32_t>(spare, static_cast<uint32_t>(std::floor(p * spare)));
    freq[i] = 1 + extra;
    used += freq[i];
    if (freq[i] > freq[best]) best = static_cast<size_t>(i);
  }
  Require(used <= kProbabilityTotal, ErrorKind::kTable, "probability quantization overflow");
  freq[best] += static_cast<uint32_t>(kProbabilityTotal - used);
  CdfTable t;
  t.sym_min = sym_min;
  t.sym_max = static_cast<int32_t>(sym_min + n - 1);
  t.cum.resize(static_cast<size_t>(n + 1));
  t.cum[0] = 0;
  for (int64_t i = 0; i < n; ++i) t.cum[i + 1] = t.cum[i] + freq[i];
  return t;
}

CdfTable BuildGaussianCdfTable(double mu, double sigma, int32_t sym_min, int32_t sym_max) {
  Require(sym_min <= sym_max, ErrorKind::kTable, "empty symbol range");
  Require(static_cast<int64_t>(sym_max) - sym_min + 1 <= kMaxTableSymbols, ErrorKind::kTable,
          "symbol range exceeds 2^15");
  Require(sigma >= 1e-6, ErrorKind::kParameter, "sigma below floor");
  const int64_t n = static_cast<int64_t>(sym_max) - sym_min + 1;
  std::vector<double> pmf(static_cast<size_t>(n));
  // Interior symbols get their bin mass; the end symbols absorb the tails.
  double prev = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double edge = static_cast<double>(sym_min + i) + 0.5;
    const double c = (i == n - 1) ? 1.0 : NormalCdf((edge - mu) / sigma);
    pmf[i] = c - prev;
    prev = c;
  }
  return QuantizePmf(pmf, sym_min);
}

CdfTable UniformTable(int32_t count) {
  std::vector<double> pmf(static_cast<size_t>(count), 1.0);
  return QuantizePmf(pmf, 0);
}

double TableEntropy(const CdfTable& table) {
  double h = 0.0;
  for (size_t i = 0; i + 1 < table.cum.size(); ++i) {
    const double p = static_cast<double>(table.cum[i + 1] - table.cum[i]) / kProbabilityTotal;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace fmsc::entropy
