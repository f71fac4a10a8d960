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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "fmsc/error.h"
#include "fmsc/field.h"

namespace fmsc::data {

std::string DimsString(const Dims& d) {
  std::ostringstream os;
  os << "[" << d[0] << "," << d[1] << "," << d[2] << "]";
  return os.str();
}

void FieldManifest::Validate() const {
  Require(dims[0] >= 1 && dims[1] >= 1 && dims[2] >= 1, ErrorKind::kFormat,
          "manifest dims must be positive, got " + DimsString(dims));
  Require(dtype == "f32", ErrorKind::kFormat, "unsupported dtype '" + dtype + "'");
}

nlohmann::json ToJson(const FieldManifest& m) {
  return {{"field_name", m.field_name},
          {"dims", {m.dims[0], m.dims[1], m.dims[2]}},
          {"dtype", m.dtype},
          {"units", m.units},
          {"domain_tag", m.domain_tag}};
}

FieldManifest ManifestFromJson(const nlohmann::json& j) {
  FieldManifest m;
  try {
    m.field_name = j.at("field_name").get<std::string>();
    const auto dims = j.at("dims").get<std::vector<int64_t>>();
    Require(dims.size() == 3, ErrorKind::kFormat, "manifest dims must have 3 entries");
    m.dims = {dims[0], dims[1], dims[2]};
    m.dtype = j.value("dtype", "f32");
    m.units = j.value("units", "");
    m.domain_tag = j.value("domain_tag", "");
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad manifest: ") + e.what());
  }
  m.Validate();
  return m;
}

FieldManifest LoadManifest(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorKind::kIo, "cannot open manifest " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, "manifest " + path + " is not JSON: " + e.what());
  }
  return ManifestFromJson(j);
}

void SaveManifest(const FieldManifest& m, const std::string& path) {
  std::ofstream out(path);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out << ToJson(m).dump(2) << "\n";
}

FieldSeries MakeField(const Dims& dims, std::vector<float> values, std::string name) {
  FieldSeries fs;
  fs.manifest.field_name = std::move(name);
  fs.manifest.dims = dims;
  fs.manifest.Validate();
  Require(static_cast<int64_t>(values.size()) == DimsNumel(dims), ErrorKind::kShape,
          "value count does not match dims " + DimsString(dims));
  fs.values = std::move(values);
  return fs;
}

void CheckFinite(const FieldSeries& fs) {
  for (size_t i = 0; i < fs.values.size(); ++i)
    if (!std::isfinite(fs.values[i]))
      Fail(ErrorKind::kData, "non-finite value at flat index " + std::to_string(i));
}

FieldSeries LoadFieldSeries(const std::string& path, const std::string& manifest_path) {
  FieldSeries fs;
  fs.manifest = LoadManifest(manifest_path);
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  Require(!ec, ErrorKind::kIo, "cannot stat " + path);
  const uint64_t expected = static_cast<uint64_t>(DimsNumel(fs.manifest.dims)) * sizeof(float);
  Require(bytes == expected, ErrorKind::kFormat,
          path + ": " + std::to_string(bytes) + " bytes, expected " + std::to_string(expected) +
              " for dims " + DimsString(fs.manifest.dims));
  fs.values.resize(DimsNumel(fs.manifest.dims));
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open " + path);
  in.read(reinterpret_cast<char*>(fs.values.data()), static_cast<std::streamsize>(expected));
  Require(in.good(), ErrorKind::kIo, "short read on " + path);
  CheckFinite(fs);
  return fs;
}

void SaveFieldSeries(const FieldSeries& fs, const std::string& path, const std::string& manifest_path) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(fs.values.data()),
            static_cast<std::streamsize>(fs.values.size() * sizeof(float)));
  SaveManifest(fs.manifest, manifest_path);
}

NormalizationParams ComputeNormalization(const FieldSeries& fs) {
  Require(!fs.values.empty(), ErrorKind::kData, "empty field");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (float v : fs.values) {
    lo = std::min<double>(lo, v);
    hi = std::max<double>(hi, v);
    sum += v;
  }
  Require(hi > lo, ErrorKind::kData, "degenerate field: constant value " + std::to_string(lo));
  return {sum / static_cast<double>(fs.values.size()), hi - lo};
}

std::pair<FieldSeries, NormalizationParams> Normalize(const FieldSeries& fs) {
  const NormalizationParams p = ComputeNormalization(fs);
  FieldSeries out = fs;
  for (float& v : out.values) v = static_cast<float>((v - p.mean) / p.range);
  return {std::move(out), p};
}

FieldSeries Denormalize(const FieldSeries& fs, const NormalizationParams& p) {
  Require(p.range > 0, ErrorKind::kData, "normalization range must be positive");
  FieldSeries out = fs;
  for (float& v : out.values) v = static_cast<float>(v * p.range + p.mean);
  return out;
}

}  // namespace fmsc::data
