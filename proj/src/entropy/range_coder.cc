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

#include "fmsc/bytes.h"
#include "fmsc/entropy.h"
#include "fmsc/error.h"

namespace fmsc::entropy {
namespace {

constexpr uint32_t kTop = 1u << 24;

}  // namespace

void RangeEncoder::Encode(uint32_t start, uint32_t freq) {
  const uint32_t r = range_ >> kProbabilityBits;
  low_ += static_cast<uint64_t>(r) * start;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    ShiftLow();
  }
}

void RangeEncoder::EncodeSymbol(const CdfTable& table, int32_t symbol) {
  if (symbol < table.sym_min || symbol > table.sym_max)
    Fail(ErrorKind::kCoding, "symbol " + std::to_string(symbol) + " outside table range [" +
                                 std::to_string(table.sym_min) + ", " +
                                 std::to_string(table.sym_max) + "]");
  const size_t i = static_cast<size_t>(symbol - table.sym_min);
  Encode(table.cum[i], table.cum[i + 1] - table.cum[i]);
}

void RangeEncoder::ShiftLow() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t temp = cache_;
    do {
      out_.push_back(static_cast<uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<uint8_t> RangeEncoder::Finish() {
  for (int i = 0; i < 5; ++i) ShiftLow();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> data) : data_(data) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | NextByte();
}

uint8_t RangeDecoder::NextByte() {
  if (pos_ >= data_.size()) Fail(ErrorKind::kCoding, "truncated range-coded stream");
  return data_[pos_++];
}

int32_t RangeDecoder::DecodeSymbol(const CdfTable& table) {
  const uint32_t r = range_ >> kProbabilityBits;
  const uint32_t v = std::min<uint32_t>(code_ / r, kProbabilityTotal - 1);
  // Largest i with cum[i] <= v.
  const auto it = std::upper_bound(table.cum.begin() + 1, table.cum.end(), v);
  const size_t i = static_cast<size_t>(it - table.cum.begin()) - 1;
  const uint32_t start = table.cum[i], freq = table.cum[i + 1] - start;
  code_ -= start * r;
  range_ = r * freq;
  while (range_ < kTop) {
    code_ = (code_ << 8) | NextByte();
    range_ <<= 8;
  }
  return table.sym_min + static_cast<int32_t>(i);
}

std::vector<uint8_t> RangeEncode(std::span<const int32_t> symbols,
                                 std::span<const CdfTable> tables) {
  Require(tables.size() == symbols.size() || tables.size() == 1, ErrorKind::kCoding,
          "need one table per symbol or a single shared table");
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i)
    enc.EncodeSymbol(tables.size() == 1 ? tables[0] : tables[i], symbols[i]);
  return enc.Finish();
}

std::vector<int32_t> RangeDecode(std::span<const uint8_t> data, std::span<const CdfTable> tables,
                                 size_t n) {
  if (n == 0) return {};
  Require(tables.size() == n || tables.size() == 1, ErrorKind::kCoding,
          "need one table per symbol or a single shared table");
  RangeDecoder dec(data);
  std::vector<int32_t> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = dec.DecodeSymbol(tables.size() == 1 ? tables[0] : tables[i]);
  return out;
}

CodedStream WriteCodedStream(std::span<const int32_t> symbols, const TableFn& table_for) {
  CodedStream s;
  if (!symbols.empty()) {
    const auto [lo, hi] = std::minmax_element(symbols.begin(), symbols.end());
    s.sym_min = *lo;
    s.sym_max = *hi;
  }
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i)
    enc.EncodeSymbol(table_for(i, s.sym_min, s.sym_max), symbols[i]);
  std::vector<uint8_t> payload = enc.Finish();
  s.payload_bytes = payload.size();
  ByteWriter w;
  w.Put<uint32_t>(static_cast<uint32_t>(symbols.size()));
  w.Put<int32_t>(s.sym_min);
  w.Put<int32_t>(s.sym_max);
  w.Put<uint32_t>(static_cast<uint32_t>(payload.size()));
  w.PutBytes(payload);
  s.bytes = w.Take();
  return s;
}

std::vector<int32_t> ReadCodedStream(std::span<const uint8_t> data, size_t& offset,
                                     const TableFn& table_for) {
  Require(offset <= data.size(), ErrorKind::kCoding, "stream offset past end");
  ByteReader r(data.subspan(offset));
  const auto n = r.Get<uint32_t>();
  const auto sym_min = r.Get<int32_t>();
  const auto sym_max = r.Get<int32_t>();
  const auto len = r.Get<uint32_t>();
  Require(sym_min <= sym_max, ErrorKind::kCoding, "corrupt stream symbol range");
  auto payload = r.GetBytes(len);
  offset += r.position();
  std::vector<int32_t> out(n);
  if (n == 0) return out;
  RangeDecoder dec(payload);
  for (size_t i = 0; i < n; ++i) out[i] = dec.DecodeSymbol(table_for(i, sym_min, sym_max));
  return out;
}

}  // namespace fmsc::entropy
