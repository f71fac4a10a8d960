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

#ifndef FMSC_ENTROPY_H_
#define FMSC_ENTROPY_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fmsc/nn/params.h"
#include "fmsc/random.h"
#include "fmsc/tensor.h"

namespace fmsc::entropy {

inline constexpr double kLikelihoodFloor = 0x1p-24;
inline constexpr int kProbabilityBits = 16;
inline constexpr uint32_t kProbabilityTotal = 1u << kProbabilityBits;
inline constexpr int64_t kMaxTableSymbols = 1 << 15;

// Round half away from zero.
double RoundHalfAway(double v);
std::vector<int32_t> QuantizeRound(std::span<const double> values);
// v + u with u ~ U(-0.5, 0.5), reproducible per seed.
std::vector<double> AddUniformNoise(std::span<const double> values, uint64_t seed);

struct BitsResult {
  std::vector<double> bits;
  double total = 0.0;
};

// Standard normal CDF.
double NormalCdf(double x);
// Mass of N(mu, sigma^2) convolved with U(-0.5, 0.5), evaluated at value.
double GaussianMass(double value, double mu, double sigma);
BitsResult GaussianLikelihoodBits(std::span<const double> values, std::span<const double> mu,
                                  std::span<const double> sigma);
// Accumulates scale * d(total bits) into the three gradient spans.
void GaussianLikelihoodBitsBackward(std::span<const double> values, std::span<const double> mu,
                                    std::span<const double> sigma, double scale,
                                    std::span<double> dvalues, std::span<double> dmu,
                                    std::span<double> dsigma);

double EstimateRate(double y_bits, double z_bits);

// Quantized cumulative frequencies over [sym_min, sym_max]:
// cum.size() == count + 1, cum[0] == 0, cum.back() == 2^16, strictly increasing.
struct CdfTable {
  int32_t sym_min = 0;
  int32_t sym_max = 0;
  std::vector<uint32_t> cum;

  int64_t count() const { return static_cast<int64_t>(sym_max) - sym_min + 1; }
  uint32_t Frequency(int32_t symbol) const;
  // -log2 of the quantized probability.
  double Bits(int32_t symbol) const;
};

// Turns a probability mass function (need not be exactly normalized) into a
// table where every symbol keeps at least 1/65536 of the mass.
CdfTable QuantizePmf(std::span<const double> pmf, int32_t sym_min);
CdfTable BuildGaussianCdfTable(double mu, double sigma, int32_t sym_min, int32_t sym_max);
CdfTable UniformTable(int32_t count);
// Exact entropy (bits/symbol) of the distribution a table encodes.
double TableEntropy(const CdfTable& table);

// Carry-propagating range coder: 32-bit range, 16-bit probabilities,
// byte-wise renormalisation.
class RangeEncoder {
 public:
  void Encode(uint32_t start, uint32_t freq);
  void EncodeSymbol(const CdfTable& table, int32_t symbol);
  std::vector<uint8_t> Finish();

 private:
  void ShiftLow();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> data);
  int32_t DecodeSymbol(const CdfTable& table);
  // True once every input byte has been consumed.
  bool exhausted() const { return pos_ == data_.size(); }

 private:
  uint8_t NextByte();

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
  uint32_t code_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
};

using TableFn = std::function<CdfTable(size_t index, int32_t sym_min, int32_t sym_max)>;

std::vector<uint8_t> RangeEncode(std::span<const int32_t> symbols,
                                 std::span<const CdfTable> tables);
std::vector<int32_t> RangeDecode(std::span<const uint8_t> data, std::span<const CdfTable> tables,
                                 size_t n);

// Self-describing stream: [n u32][sym_min i32][sym_max i32][byte_len u32][bytes].
// table_for builds element i's table given the stream's symbol support.
struct CodedStream {
  std::vector<uint8_t> bytes;  // full framed stream
  int32_t sym_min = 0;
  int32_t sym_max = 0;
  size_t payload_bytes = 0;    // range-coded bytes only
};
CodedStream WriteCodedStream(std::span<const int32_t> symbols, const TableFn& table_for);
// Reads one stream from data starting at offset; advances offset.
std::vector<int32_t> ReadCodedStream(std::span<const uint8_t> data, size_t& offset,
                                     const TableFn& table_for);

// Fully factorized learned density for the hyper-latents: one monotone
// cumulative c(x) per channel built from four positivity-constrained affine
// stages (widths 1-3-3-3-1) with tanh gating between them.
class FactorizedPrior {
 public:
  static constexpr int kStages = 4;

  FactorizedPrior() = default;
  FactorizedPrior(nn::ParamSet& params, const std::string& name, int channels, Rng& rng);

  int channels() const { return channels_; }

  double Logit(const nn::ParamSet& params, int channel, double x) const;
  double Cdf(const nn::ParamSet& params, int channel, double x) const;
  // c(v + 0.5) - c(v - 0.5), unfloored.
  double Mass(const nn::ParamSet& params, int channel, double v) const;

  // z is [channels, h, w].
  BitsResult Bits(const nn::ParamSet& params, const Tensor& z) const;
  // Accumulates scale * d(total bits) into parameter grads and dz.
  void BitsBackward(nn::ParamSet& params, const Tensor& z, double scale, Tensor& dz) const;

  CdfTable Table(const nn::ParamSet& params, int channel, int32_t sym_min, int32_t sym_max) const;

 private:
  struct Trace;
  double Forward(const nn::ParamSet& params, int channel, double x, Trace* trace) const;
  // Returns d logit / dx; accumulates g * d logit / dparams.
  double Backward(nn::ParamSet& params, int channel, const Trace& trace, double g) const;

  int channels_ = 0;
  size_t matrix_[kStages] = {};
  size_t bias_[kStages] = {};
  size_t factor_[kStages - 1] = {};
};

}  // namespace fmsc::entropy

#endif  // FMSC_ENTROPY_H_
