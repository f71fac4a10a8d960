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

#ifndef FMSC_CODEC_H_
#define FMSC_CODEC_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmsc/error_bound.h"
#include "fmsc/field.h"
#include "fmsc/hash.h"
#include "fmsc/weights.h"

namespace fmsc::codec {

inline constexpr uint16_t kArtifactVersion = 1;
// Quantized latents are clamped to this magnitude so every table stays
// within 2^15 symbols.
inline constexpr int32_t kMaxLatentMagnitude = (1 << 14) - 1;

struct CompressOptions {
  double nrmse = 1e-3;
  int64_t hs = 64;
  int64_t ws = 64;
  eb::SelectionOrder order = eb::SelectionOrder::kMagnitude;
};

struct SymbolRange {
  int32_t min = 0;
  int32_t max = 0;
};

struct ArtifactHeader {
  uint16_t version = kArtifactVersion;
  Digest model_hash{};
  Digest basis_hash{};
  data::FieldManifest manifest;
  data::NormalizationParams norm;
  data::PadInfo pad;
  data::Dims padded = {0, 0, 0};
  int64_t hs = 0;
  int64_t ws = 0;
  int64_t num_blocks = 0;
  SymbolRange z_range;
  SymbolRange y_range;
  double eps = 0.0;
  double tau = 0.0;
  double delta = 0.0;
  eb::BlockDims basis_block;
  std::string order = "magnitude";
  double y_bits_estimate = 0.0;
  double z_bits_estimate = 0.0;
  uint64_t hyper_len = 0;
  uint64_t latent_len = 0;
  uint64_t corr_len = 0;
};

nlohmann::json ToJson(const ArtifactHeader& h);
ArtifactHeader ArtifactHeaderFromJson(const nlohmann::json& j);

struct CompressedArtifact {
  ArtifactHeader header;
  std::vector<uint8_t> hyper;       // one coded stream of every z~ symbol
  std::vector<uint8_t> latent;      // one coded stream of every y~ symbol
  std::vector<uint8_t> correction;  // residual correction payload
};

// "FMSC" u16 version | u32 header_len | header JSON | u32 hyper_len | hyper
// | u32 latent_len | latent | u32 corr_len | corr | u32 crc32 of all prior bytes
std::vector<uint8_t> SerializeArtifact(const CompressedArtifact& a);
CompressedArtifact ParseArtifact(std::span<const uint8_t> bytes);

struct CompressStats {
  double y_bits_estimate = 0.0;
  double z_bits_estimate = 0.0;
  size_t y_payload_bytes = 0;  // range-coded bytes only
  size_t z_payload_bytes = 0;
  int64_t coefficients = 0;
  double seconds = 0.0;
};

CompressedArtifact Compress(const data::FieldSeries& fs, const WeightStore& weights,
                            const CompressOptions& options, CompressStats* stats = nullptr);
data::FieldSeries Decompress(const CompressedArtifact& artifact, const WeightStore& weights);

double EvaluateNrmse(const data::FieldSeries& orig, const data::FieldSeries& recon);

struct Report {
  double nrmse = 0.0;
  double compression_ratio = 0.0;
  double bits_per_voxel = 0.0;
  size_t artifact_bytes = 0;
  size_t header_bytes = 0;
  size_t hyper_bytes = 0;
  size_t latent_bytes = 0;
  size_t correction_bytes = 0;
  double compress_seconds = 0.0;
  double decompress_seconds = 0.0;

  nlohmann::json ToJson() const;
};

// Original size counts 4 bytes per element.
double CompressionRatio(int64_t elements, size_t artifact_bytes);
Report MakeReport(const data::FieldSeries& orig, const data::FieldSeries& recon,
                  std::span<const uint8_t> artifact_bytes);

struct RdRow {
  std::string label;
  int64_t block = 0;
  double eps = 0.0;
  double compression_ratio = 0.0;
  double nrmse = 0.0;
  double bits_per_voxel = 0.0;
};

std::vector<RdRow> RdCurve(const WeightStore& weights, const data::FieldSeries& fs,
                           const std::vector<double>& eps_list, const std::vector<int64_t>& blocks,
                           const std::string& label = "model");
std::string RdCsv(const std::vector<RdRow>& rows);

// Header JSON plus byte accounting of every section.
nlohmann::json Inspect(std::span<const uint8_t> bytes);

}  // namespace fmsc::codec

#endif  // FMSC_CODEC_H_
