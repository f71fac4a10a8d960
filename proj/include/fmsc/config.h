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

#ifndef FMSC_CONFIG_H_
#define FMSC_CONFIG_H_

#include <cstdint>
#include <nlohmann/json.hpp>

namespace fmsc {

struct SRConfig {
  int in_channels = 8;  // 2C
  int features = 16;    // F
  int num_blocks = 2;   // B
  int esa_reduction = 4;
  int cca_reduction = 16;
  int upscale = 4;

  void Validate() const;
};

enum class DecoderKind {
  kSuperResolution,  // BCB super-resolution head
  kPlain,            // two stride-2 transposed 2D convolutions
};

struct ModelConfig {
  int channels = 4;  // C
  double leaky_slope = 0.2;
  SRConfig sr;
  DecoderKind decoder = DecoderKind::kSuperResolution;
  uint64_t seed = 0;

  // C = 4, F = 16, B = 2: sub-second tests on [8, 64, 64] blocks.
  static ModelConfig Desk(uint64_t seed = 0);
  // C = 32, F = 48, B = 4: about two million parameters.
  static ModelConfig Full(uint64_t seed = 0);

  void Validate() const;
};

nlohmann::json ToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(const nlohmann::json& j);

const char* DecoderKindName(DecoderKind kind);
DecoderKind DecoderKindFromName(const std::string& name);

inline constexpr double kSigmaFloor = 1e-6;

}  // namespace fmsc

#endif  // FMSC_CONFIG_H_
