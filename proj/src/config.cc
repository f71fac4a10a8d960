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

#include "fmsc/config.h"

#include "fmsc/error.h"

namespace fmsc {

void SRConfig::Validate() const {
  Require(features >= 4, ErrorKind::kSpec, "SR feature width must be >= 4");
  Require(num_blocks >= 1, ErrorKind::kSpec, "SR needs at least one BCB block");
  Require(upscale == 4, ErrorKind::kSpec, "SR upscale is fixed at 4");
  Require(esa_reduction >= 1 && cca_reduction >= 1, ErrorKind::kSpec,
          "attention reductions must be >= 1");
  Require(in_channels >= 1, ErrorKind::kSpec, "SR input channels must be >= 1");
}

ModelConfig ModelConfig::Desk(uint64_t seed) {
  ModelConfig c;
  c.channels = 4;
  c.sr = SRConfig{8, 16, 2, 4, 16, 4};
  c.seed = seed;
  return c;
}

ModelConfig ModelConfig::Full(uint64_t seed) {
  ModelConfig c;
  c.channels = 32;
  c.sr = SRConfig{64, 48, 4, 4, 16, 4};
  c.seed = seed;
  return c;
}

void ModelConfig::Validate() const {
  Require(channels >= 1, ErrorKind::kSpec, "channel count C must be >= 1");
  Require(leaky_slope > 0.0 && leaky_slope < 1.0, ErrorKind::kSpec,
          "leaky slope must lie in (0, 1)");
  Require(sr.in_channels == 2 * channels, ErrorKind::kSpec, "SR input channels must equal 2C");
  sr.Validate();
}

const char* DecoderKindName(DecoderKind kind) {
  return kind == DecoderKind::kPlain ? "plain" : "sr";
}

DecoderKind DecoderKindFromName(const std::string& name) {
  if (name == "sr") return DecoderKind::kSuperResolution;
  if (name == "plain") return DecoderKind::kPlain;
  Fail(ErrorKind::kSpec, "unknown decoder kind: " + name);
}

nlohmann::json ToJson(const ModelConfig& c) {
  return {
      {"channels", c.channels},
      {"leaky_slope", c.leaky_slope},
      {"decoder", DecoderKindName(c.decoder)},
      {"seed", c.seed},
      {"sr",
       {{"in_channels", c.sr.in_channels},
        {"features", c.sr.features},
        {"num_blocks", c.sr.num_blocks},
        {"esa_reduction", c.sr.esa_reduction},
        {"cca_reduction", c.sr.cca_reduction},
        {"upscale", c.sr.upscale}}},
  };
}

ModelConfig ModelConfigFromJson(const nlohmann::json& j) {
  try {
    // Missing keys fall back to the named preset (desk by default).
    const std::string preset = j.value("preset", "desk");
    Require(preset == "desk" || preset == "full", ErrorKind::kFormat, "unknown preset '" + preset + "'");
    ModelConfig c = preset == "full" ? ModelConfig::Full() : ModelConfig::Desk();
    c.channels = j.value("channels", c.channels);
    c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
    if (j.contains("decoder")) c.decoder = DecoderKindFromName(j.at("decoder").get<std::string>());
    c.seed = j.value("seed", c.seed);
    if (j.contains("sr")) {
      const auto& s = j.at("sr");
      c.sr.in_channels = s.value("in_channels", c.sr.in_channels);
      c.sr.features = s.value("features", c.sr.features);
      c.sr.num_blocks = s.value("num_blocks", c.sr.num_blocks);
      c.sr.esa_reduction = s.value("esa_reduction", c.sr.esa_reduction);
      c.sr.cca_reduction = s.value("cca_reduction", c.sr.cca_reduction);
      c.sr.upscale = s.value("upscale", c.sr.upscale);
    } else {
      c.sr.in_channels = 2 * c.channels;
    }
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad model config: ") + e.what());
  }
}

}  // namespace fmsc
