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

#include <bit>
#include <cmath>
#include <unordered_set>

#include "fmsc/bytes.h"
#include "fmsc/entropy.h"
#include "fmsc/error.h"
#include "fmsc/error_bound.h"

namespace fmsc::eb {
namespace {

using entropy::CdfTable;

constexpr int kDirect = 256;   // zigzag values below this are coded directly
constexpr int kContexts = 32;  // buckets of the running magnitude

// Nonzero q only: 1 -> 0, -1 -> 1, 2 -> 2, -2 -> 3, ...
uint32_t ZigZag(int32_t q) {
  const int64_t v = q;
  return static_cast<uint32_t>(v > 0 ? 2 * v - 2 : -2 * v - 1);
}

int32_t UnZigZag(uint32_t u) {
  const int64_t v = u;
  return static_cast<int32_t>(u % 2 == 0 ? v / 2 + 1 : -(v + 1) / 2);
}

// Running mean of zigzag values in 1/16 units; bucketed by bit width.
class MagnitudeModel {
 public:
  MagnitudeModel() {
    tables_.reserve(kContexts);
    for (int b = 0; b < kContexts; ++b) {
      const double mean = b == 0 ? 0.05 : std::ldexp(1.5, b - 1) / 16.0;
      const double theta = mean / (1.0 + mean);
      std::vector<double> pmf(kDirect + 1);
      double p = 1.0 - theta;
      for (int u = 0; u < kDirect; ++u, p *= theta) pmf[u] = p;
      pmf[kDirect] = std::pow(theta, kDirect);  // escape
      tables_.push_back(entropy::QuantizePmf(pmf, 0));
    }
  }

  const CdfTable& table() const {
    const int b = std::min<int>(kContexts - 1, std::bit_width(static_cast<uint64_t>(acc_)));
    return tables_[b];
  }

  void Update(uint32_t u) {
    const int64_t target = static_cast<int64_t>(std::min<uint32_t>(u, 1u << 24)) * 16;
    acc_ += (target - acc_) / 8;
  }

 private:
  std::vector<CdfTable> tables_;
  int64_t acc_ = 64;
};

const CdfTable& ByteTable() {
  static const CdfTable t = entropy::UniformTable(256);
  return t;
}

}  // namespace

std::vector<uint8_t> EncodeCorrection(const CorrectionPayload& payload, int64_t d) {
  Require(d >= 1 && d <= entropy::kMaxTableSymbols, ErrorKind::kRecord, "unsupported basis size");
  ByteWriter w;
  w.PutBytes(payload.basis_hash);
  w.Put<double>(payload.delta);
  w.Put<uint32_t>(static_cast<uint32_t>(payload.records.size()));
  size_t total = 0;
  for (const auto& rec : payload.records) {
    Require(rec.selected.size() <= static_cast<size_t>(d) && rec.selected.size() <= 0xFFFF,
            ErrorKind::kRecord, "record holds more coefficients than the basis");
    w.Put<uint16_t>(static_cast<uint16_t>(rec.selected.size()));
    total += rec.selected.size();
  }
  if (total == 0) return w.Take();

  const CdfTable index_table = entropy::UniformTable(static_cast<int32_t>(d));
  MagnitudeModel model;
  entropy::RangeEncoder enc;
  for (const auto& rec : payload.records) {
    std::unordered_set<int32_t> seen;
    for (const Coefficient& c : rec.selected) {
      if (c.index < 0 || c.index >= d)
        Fail(ErrorKind::kRecord, "coefficient index " + std::to_string(c.index) + " out of range");
      if (!seen.insert(c.index).second)
        Fail(ErrorKind::kRecord, "duplicate coefficient index " + std::to_string(c.index));
      Require(c.q != 0, ErrorKind::kRecord, "zero coefficients are never stored");
      enc.EncodeSymbol(index_table, c.index);
      const uint32_t u = ZigZag(c.q);
      if (u < kDirect) {
        enc.EncodeSymbol(model.table(), static_cast<int32_t>(u));
      } else {
        enc.EncodeSymbol(model.table(), kDirect);
        const uint32_t extra = u - kDirect;
        for (int k = 0; k < 4; ++k) enc.EncodeSymbol(ByteTable(), static_cast<int32_t>((extra >> (8 * k)) & 0xFF));
      }
      model.Update(u);
    }
  }
  const std::vector<uint8_t> bytes = enc.Finish();
  w.Put<uint32_t>(static_cast<uint32_t>(bytes.size()));
  w.PutBytes(bytes);
  return w.Take();
}

CorrectionPayload DecodeCorrection(std::span<const uint8_t> bytes, int64_t d) {
  Require(d >= 1 && d <= entropy::kMaxTableSymbols, ErrorKind::kRecord, "unsupported basis size");
  ByteReader r(bytes);
  CorrectionPayload p;
  const auto hash = r.GetBytes(32);
  std::copy(hash.begin(), hash.end(), p.basis_hash.begin());
  p.delta = r.Get<double>();
  const uint32_t n = r.Get<uint32_t>();
  Require(n <= r.remaining() / 2, ErrorKind::kCoding, "correction block count exceeds payload");
  p.records.resize(n);
  std::vector<uint16_t> counts(n);
  size_t total = 0;
  for (auto& c : counts) {
    c = r.Get<uint16_t>();
    Require(c <= d, ErrorKind::kCoding, "selection count exceeds basis size");
    total += c;
  }
  if (total == 0) {
    Require(r.done(), ErrorKind::kCoding, "trailing bytes after correction counts");
    return p;
  }
  const uint32_t len = r.Get<uint32_t>();
  const auto stream = r.GetBytes(len);
  Require(r.done(), ErrorKind::kCoding, "trailing bytes after correction stream");

  const CdfTable index_table = entropy::UniformTable(static_cast<int32_t>(d));
  MagnitudeModel model;
  entropy::RangeDecoder dec(stream);
  for (uint32_t b = 0; b < n; ++b) {
    auto& sel = p.records[b].selected;
    sel.reserve(counts[b]);
    for (uint16_t k = 0; k < counts[b]; ++k) {
      const int32_t index = dec.DecodeSymbol(index_table);
      uint32_t u = static_cast<uint32_t>(dec.DecodeSymbol(model.table()));
      if (u == kDirect) {
        uint32_t extra = 0;
        for (int j = 0; j < 4; ++j) extra |= static_cast<uint32_t>(dec.DecodeSymbol(ByteTable())) << (8 * j);
        u = kDirect + extra;
      }
      model.Update(u);
      sel.push_back({index, UnZigZag(u)});
    }
  }
  return p;
}

}  // namespace fmsc::eb
