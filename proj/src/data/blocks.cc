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
#include <numeric>

#include "fmsc/error.h"
#include "fmsc/field.h"

namespace fmsc::data {

SpatioTemporalBlock ExtractBlock(const FieldSeries& fs, const Dims& origin, const Dims& dims) {
  const Dims& d = fs.dims();
  for (int a = 0; a < 3; ++a)
    Require(origin[a] >= 0 && origin[a] + dims[a] <= d[a], ErrorKind::kPartition,
            "block at " + DimsString(origin) + " of size " + DimsString(dims) + " exceeds " +
                DimsString(d));
  SpatioTemporalBlock b;
  b.origin = origin;
  b.dims = dims;
  b.values.resize(DimsNumel(dims));
  float* dst = b.values.data();
  for (int64_t t = 0; t < dims[0]; ++t)
    for (int64_t h = 0; h < dims[1]; ++h) {
      std::copy_n(fs.values.data() + fs.Index(origin[0] + t, origin[1] + h, origin[2]), dims[2], dst);
      dst += dims[2];
    }
  return b;
}

std::vector<SpatioTemporalBlock> PartitionBlocks(const FieldSeries& fs, int64_t hs, int64_t ws,
                                                 int64_t bt) {
  const Dims& d = fs.dims();
  Require(hs > 0 && ws > 0 && bt > 0, ErrorKind::kPartition, "block sizes must be positive");
  Require(hs % 64 == 0 && ws % 64 == 0, ErrorKind::kPartition,
          "block sizes must be multiples of 64, got " + std::to_string(hs) + "x" + std::to_string(ws));
  Require(d[0] % bt == 0 && d[1] % hs == 0 && d[2] % ws == 0, ErrorKind::kPartition,
          "block [" + std::to_string(bt) + "," + std::to_string(hs) + "," + std::to_string(ws) +
              "] does not divide " + DimsString(d));
  std::vector<SpatioTemporalBlock> out;
  out.reserve((d[0] / bt) * (d[1] / hs) * (d[2] / ws));
  for (int64_t t = 0; t < d[0]; t += bt)
    for (int64_t h = 0; h < d[1]; h += hs)
      for (int64_t w = 0; w < d[2]; w += ws) out.push_back(ExtractBlock(fs, {t, h, w}, {bt, hs, ws}));
  return out;
}

FieldSeries ReassembleBlocks(const std::vector<SpatioTemporalBlock>& blocks, const Dims& dims) {
  FieldSeries fs;
  fs.manifest.dims = dims;
  fs.manifest.Validate();
  fs.values.assign(DimsNumel(dims), 0.0f);
  std::vector<uint8_t> covered(fs.values.size(), 0);
  for (const auto& b : blocks) {
    for (int a = 0; a < 3; ++a)
      Require(b.origin[a] >= 0 && b.origin[a] + b.dims[a] <= dims[a], ErrorKind::kPartition,
              "block at " + DimsString(b.origin) + " falls outside " + DimsString(dims));
    Require(static_cast<int64_t>(b.values.size()) == DimsNumel(b.dims), ErrorKind::kPartition,
            "block value count does not match its dims");
    const float* src = b.values.data();
    for (int64_t t = 0; t < b.dims[0]; ++t)
      for (int64_t h = 0; h < b.dims[1]; ++h) {
        const size_t base = fs.Index(b.origin[0] + t, b.origin[1] + h, b.origin[2]);
        for (int64_t w = 0; w < b.dims[2]; ++w) {
          if (covered[base + w]) Fail(ErrorKind::kPartition, "blocks overlap near " + DimsString(b.origin));
          covered[base + w] = 1;
        }
        std::copy_n(src, b.dims[2], fs.values.data() + base);
        src += b.dims[2];
      }
  }
  Require(std::all_of(covered.begin(), covered.end(), [](uint8_t c) { return c != 0; }),
          ErrorKind::kPartition, "blocks leave a gap in " + DimsString(dims));
  return fs;
}

RandomCropSampler::RandomCropSampler(const FieldSeries& fs, uint64_t seed, const Dims& crop)
    : crop_(crop), rng_(seed) {
  Require(crop[0] >= 1 && crop[1] >= 1 && crop[2] >= 1, ErrorKind::kPartition, "crop must be positive");
  const Dims& d = fs.dims();
  if (d[0] < crop[0] || d[1] < crop[1] || d[2] < crop[2])
    field_ = ReflectPadTo(fs, {std::max(d[0], crop[0]), std::max(d[1], crop[1]), std::max(d[2], crop[2])}).first;
  else
    field_ = fs;
}

SpatioTemporalBlock RandomCropSampler::Next() {
  const Dims& d = field_.dims();
  const Dims origin = {static_cast<int64_t>(rng_.Below(d[0] - crop_[0] + 1)),
                       static_cast<int64_t>(rng_.Below(d[1] - crop_[1] + 1)),
                       static_cast<int64_t>(rng_.Below(d[2] - crop_[2] + 1))};
  return ExtractBlock(field_, origin, crop_);
}

std::vector<int64_t> BalanceSchedule(const std::vector<int64_t>& sizes) {
  Require(!sizes.empty(), ErrorKind::kSchedule, "no datasets to balance");
  for (int64_t s : sizes) Require(s >= 1, ErrorKind::kSchedule, "empty dataset in schedule");
  const int64_t max = *std::max_element(sizes.begin(), sizes.end());
  std::vector<int64_t> factors;
  factors.reserve(sizes.size());
  for (int64_t s : sizes) factors.push_back((max + s - 1) / s);
  return factors;
}

std::vector<int> BalancedEpoch(const std::vector<int64_t>& sizes, uint64_t seed) {
  const std::vector<int64_t> factors = BalanceSchedule(sizes);
  const int64_t max = *std::max_element(sizes.begin(), sizes.end());
  std::vector<int> ids;
  for (size_t i = 0; i < sizes.size(); ++i) {
    // size_i * r_i >= max; the surplus repeats are dropped.
    const int64_t effective = std::min(sizes[i] * factors[i], max);
    ids.insert(ids.end(), effective, static_cast<int>(i));
  }
  Rng rng(seed);
  for (size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.Below(i)]);
  return ids;
}

}  // namespace fmsc::data
