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

#ifndef FMSC_FIELD_H_
#define FMSC_FIELD_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmsc/random.h"

namespace fmsc::data {

using Dims = std::array<int64_t, 3>;  // [T, H, W]

std::string DimsString(const Dims& d);
inline int64_t DimsNumel(const Dims& d) { return d[0] * d[1] * d[2]; }

struct FieldManifest {
  std::string field_name = "field";
  Dims dims = {0, 0, 0};
  std::string dtype = "f32";
  std::string units;
  std::string domain_tag;

  void Validate() const;
  friend bool operator==(const FieldManifest&, const FieldManifest&) = default;
};

nlohmann::json ToJson(const FieldManifest& m);
FieldManifest ManifestFromJson(const nlohmann::json& j);
FieldManifest LoadManifest(const std::string& path);
void SaveManifest(const FieldManifest& m, const std::string& path);

// Row-major [T, H, W] float32 values, W fastest.
struct FieldSeries {
  FieldManifest manifest;
  std::vector<float> values;

  const Dims& dims() const { return manifest.dims; }
  size_t Index(int64_t t, int64_t h, int64_t w) const {
    return static_cast<size_t>((t * manifest.dims[1] + h) * manifest.dims[2] + w);
  }
  float at(int64_t t, int64_t h, int64_t w) const { return values[Index(t, h, w)]; }
};

FieldSeries MakeField(const Dims& dims, std::vector<float> values, std::string name = "field");
FieldSeries LoadFieldSeries(const std::string& path, const std::string& manifest_path);
void SaveFieldSeries(const FieldSeries& fs, const std::string& path, const std::string& manifest_path);
// Rejects NaN/Inf with a data error naming the first flat index.
void CheckFinite(const FieldSeries& fs);

struct NormalizationParams {
  double mean = 0.0;
  double range = 1.0;
  friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

NormalizationParams ComputeNormalization(const FieldSeries& fs);
std::pair<FieldSeries, NormalizationParams> Normalize(const FieldSeries& fs);
FieldSeries Denormalize(const FieldSeries& fs, const NormalizationParams& p);

struct AxisPad {
  int64_t before = 0;
  int64_t after = 0;
  friend bool operator==(const AxisPad&, const AxisPad&) = default;
};

struct PadInfo {
  AxisPad t, h, w;
  bool edge_fallback = false;  // some axis was too short to mirror
  friend bool operator==(const PadInfo&, const PadInfo&) = default;
};

nlohmann::json ToJson(const PadInfo& p);
PadInfo PadInfoFromJson(const nlohmann::json& j);

struct PadAlignment {
  int64_t t = 8;
  int64_t h = 64;
  int64_t w = 64;
};

// Mirror padding (no edge repeat) placed after the data on every axis.
std::pair<FieldSeries, PadInfo> ReflectPad(const FieldSeries& fs, const PadAlignment& align = {});
// Pads up to at least the given dims.
std::pair<FieldSeries, PadInfo> ReflectPadTo(const FieldSeries& fs, const Dims& target);
FieldSeries Unpad(const FieldSeries& fs, const PadInfo& p);

struct SpatioTemporalBlock {
  Dims origin = {0, 0, 0};
  Dims dims = {0, 0, 0};
  std::vector<float> values;
};

inline constexpr int64_t kBlockFrames = 8;

std::vector<SpatioTemporalBlock> PartitionBlocks(const FieldSeries& fs, int64_t hs, int64_t ws,
                                                 int64_t bt = kBlockFrames);
FieldSeries ReassembleBlocks(const std::vector<SpatioTemporalBlock>& blocks, const Dims& dims);
SpatioTemporalBlock ExtractBlock(const FieldSeries& fs, const Dims& origin, const Dims& dims);

class RandomCropSampler {
 public:
  RandomCropSampler(const FieldSeries& fs, uint64_t seed, const Dims& crop = {8, 256, 256});

  SpatioTemporalBlock Next();
  const FieldSeries& field() const { return field_; }

 private:
  FieldSeries field_;
  Dims crop_;
  Rng rng_;
};

// r_i = ceil(max / size_i).
std::vector<int64_t> BalanceSchedule(const std::vector<int64_t>& sizes);
// One epoch of dataset ids: every dataset appears max(sizes) times, shuffled.
std::vector<int> BalancedEpoch(const std::vector<int64_t>& sizes, uint64_t seed);

enum class SyntheticKind { kTravelingWave, kAdvectedBlobs, kMixed };

std::string SyntheticKindName(SyntheticKind k);
SyntheticKind SyntheticKindFromName(const std::string& name);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kTravelingWave;
  Dims dims = {8, 64, 64};
  uint64_t seed = 0;
  double amplitude = 1.0;
  double velocity = 1.0;           // pixels per frame
  std::optional<double> direction;  // radians; drawn from the seed when unset
  int harmonics = 3;
  double min_wavelength = 24.0;
  double max_wavelength = 96.0;
  int blobs = 6;
  double blob_sigma = 6.0;
};

FieldSeries SynthesizeDataset(const SyntheticSpec& spec);

}  // namespace fmsc::data

#endif  // FMSC_FIELD_H_
