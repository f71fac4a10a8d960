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

#ifndef FMSC_WEIGHTS_H_
#define FMSC_WEIGHTS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmsc/config.h"
#include "fmsc/error_bound.h"
#include "fmsc/hash.h"
#include "fmsc/model.h"

namespace fmsc {

struct ParamArray {
  std::string name;
  Shape shape;
  std::vector<float> values;
  friend bool operator==(const ParamArray&, const ParamArray&) = default;
};

// Checkpoint: config snapshot, float32 parameters, the residual basis asset
// and free-form provenance metadata.
//
//   "FMCK" u16 version | u32 len, JSON {config, metadata} | u32 n, arrays
//   | u8 has_basis, basis | model hash (32) | basis hash (32, zero if none)
//
// Array: u16 name_len, name, u8 rank, i64 dims, f32 values.
// Basis: i64 bt, bh, bw, f64 U column-major, f64 eigenvalues.
class WeightStore {
 public:
  static constexpr uint16_t kVersion = 1;

  ModelConfig config;
  std::vector<ParamArray> arrays;
  std::optional<eb::PcaBasis> basis;
  nlohmann::json metadata = nlohmann::json::object();

  static WeightStore FromModel(const Model& model);
  Model ToModel() const;
  void LoadInto(Model& model) const;

  // SHA-256 over the config snapshot and every parameter array.
  Digest ModelHash() const;
  size_t ParamCount() const;
  std::map<std::string, size_t> ParamBreakdown() const;

  std::vector<uint8_t> Serialize() const;
  static WeightStore Deserialize(std::span<const uint8_t> bytes);
  void Save(const std::string& path) const;
  static WeightStore Load(const std::string& path);
};

std::vector<uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::span<const uint8_t> bytes);

}  // namespace fmsc

#endif  // FMSC_WEIGHTS_H_
