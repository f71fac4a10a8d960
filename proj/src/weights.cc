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

#include "fmsc/weights.h"

#include <fstream>
#include <iterator>

#include "fmsc/bytes.h"
#include "fmsc/error.h"

namespace fmsc {
namespace {

constexpr char kMagic[4] = {'F', 'M', 'C', 'K'};

void PutArray(ByteWriter& w, const ParamArray& a) {
  w.Put<uint16_t>(static_cast<uint16_t>(a.name.size()));
  w.PutString(a.name);
  w.Put<uint8_t>(static_cast<uint8_t>(a.shape.size()));
  for (int64_t d : a.shape) w.Put<int64_t>(d);
  w.PutBytes({reinterpret_cast<const uint8_t*>(a.values.data()), a.values.size() * sizeof(float)});
}

}  // namespace

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileBytes(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  Require(out.good(), ErrorKind::kIo, "write failed on " + path);
}

WeightStore WeightStore::FromModel(const Model& model) {
  WeightStore ws;
  ws.config = model.config();
  for (const auto& p : model.params()) {
    ParamArray a{p.name, p.shape, {}};
    a.values.assign(p.value.begin(), p.value.end());
    ws.arrays.push_back(std::move(a));
  }
  return ws;
}

void WeightStore::LoadInto(Model& model) const {
  auto& params = model.params();
  Require(params.size() == arrays.size(), ErrorKind::kModel,
          "checkpoint holds " + std::to_string(arrays.size()) + " arrays, model expects " +
              std::to_string(params.size()));
  for (const ParamArray& a : arrays) {
    const auto idx = params.Find(a.name);
    Require(idx.has_value(), ErrorKind::kModel, "unexpected parameter '" + a.name + "'");
    auto& p = params.at(*idx);
    Require(p.shape == a.shape, ErrorKind::kModel,
            "parameter '" + a.name + "' has shape " + ShapeString(a.shape) + ", model expects " +
                ShapeString(p.shape));
    p.value.assign(a.values.begin(), a.values.end());
  }
}

Model WeightStore::ToModel() const {
  Model m(config);
  LoadInto(m);
  return m;
}

Digest WeightStore::ModelHash() const {
  ByteWriter w;
  w.PutString(ToJson(config).dump());
  for (const auto& a : arrays) PutArray(w, a);
  return Sha256(w.bytes());
}

size_t WeightStore::ParamCount() const {
  size_t n = 0;
  for (const auto& a : arrays) n += a.values.size();
  return n;
}

std::map<std::string, size_t> WeightStore::ParamBreakdown() const {
  std::map<std::string, size_t> out;
  for (const auto& a : arrays) out[a.name.substr(0, a.name.find('.'))] += a.values.size();
  return out;
}

std::vector<uint8_t> WeightStore::Serialize() const {
  ByteWriter w;
  w.PutBytes({reinterpret_cast<const uint8_t*>(kMagic), 4});
  w.Put<uint16_t>(kVersion);
  const std::string head = nlohmann::json{{"config", ToJson(config)}, {"metadata", metadata}}.dump();
  w.Put<uint32_t>(static_cast<uint32_t>(head.size()));
  w.PutString(head);
  w.Put<uint32_t>(static_cast<uint32_t>(arrays.size()));
  for (const auto& a : arrays) PutArray(w, a);
  w.Put<uint8_t>(basis ? 1 : 0);
  if (basis) {
    w.Put<int64_t>(basis->block.t);
    w.Put<int64_t>(basis->block.h);
    w.Put<int64_t>(basis->block.w);
    w.PutBytes({reinterpret_cast<const uint8_t*>(basis->u.data()),
                static_cast<size_t>(basis->u.size()) * sizeof(double)});
    w.PutBytes({reinterpret_cast<const uint8_t*>(basis->eigenvalues.data()),
                static_cast<size_t>(basis->eigenvalues.size()) * sizeof(double)});
  }
  w.PutBytes(ModelHash());
  w.PutBytes(basis ? basis->Hash() : Digest{});
  return w.Take();
}

WeightStore WeightStore::Deserialize(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.GetBytes(4);
  Require(std::equal(magic.begin(), magic.end(), kMagic), ErrorKind::kFormat, "not a checkpoint (bad magic)");
  const uint16_t version = r.Get<uint16_t>();
  Require(version == kVersion, ErrorKind::kFormat, "unsupported checkpoint version " + std::to_string(version));

  WeightStore ws;
  const std::string head = r.GetString(r.Get<uint32_t>());
  try {
    const auto j = nlohmann::json::parse(head);
    ws.config = ModelConfigFromJson(j.at("config"));
    ws.metadata = j.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad checkpoint header: ") + e.what());
  }
  const uint32_t n = r.Get<uint32_t>();
  for (uint32_t i = 0; i < n; ++i) {
    ParamArray a;
    a.name = r.GetString(r.Get<uint16_t>());
    const uint8_t rank = r.Get<uint8_t>();
    for (uint8_t k = 0; k < rank; ++k) {
      a.shape.push_back(r.Get<int64_t>());
      Require(a.shape.back() >= 0 && a.shape.back() < (int64_t{1} << 32), ErrorKind::kFormat,
              "bad dimension in '" + a.name + "'");
    }
    const int64_t count = ShapeNumel(a.shape);
    Require(static_cast<uint64_t>(count) * sizeof(float) <= r.remaining(), ErrorKind::kFormat,
            "truncated parameter '" + a.name + "'");
    a.values.resize(count);
    const auto raw = r.GetBytes(count * sizeof(float));
    std::memcpy(a.values.data(), raw.data(), raw.size());
    ws.arrays.push_back(std::move(a));
  }
  if (r.Get<uint8_t>()) {
    eb::PcaBasis b;
    b.block.t = r.Get<int64_t>();
    b.block.h = r.Get<int64_t>();
    b.block.w = r.Get<int64_t>();
    const int64_t d = b.d();
    Require(b.block.t > 0 && b.block.h > 0 && b.block.w > 0 && d <= 4096, ErrorKind::kFormat,
            "bad basis block dims");
    b.u.resize(d, d);
    b.eigenvalues.resize(d);
    const auto u = r.GetBytes(d * d * sizeof(double));
    std::memcpy(b.u.data(), u.data(), u.size());
    const auto ev = r.GetBytes(d * sizeof(double));
    std::memcpy(b.eigenvalues.data(), ev.data(), ev.size());
    ws.basis = std::move(b);
  }
  Digest model_hash, basis_hash;
  const auto mh = r.GetBytes(32);
  std::copy(mh.begin(), mh.end(), model_hash.begin());
  const auto bh = r.GetBytes(32);
  std::copy(bh.begin(), bh.end(), basis_hash.begin());
  Require(r.done(), ErrorKind::kFormat, "trailing bytes in checkpoint");
  Require(model_hash == ws.ModelHash(), ErrorKind::kChecksum, "checkpoint model hash mismatch");
  Require(basis_hash == (ws.basis ? ws.basis->Hash() : Digest{}), ErrorKind::kChecksum,
          "checkpoint basis hash mismatch");
  return ws;
}

void WeightStore::Save(const std::string& path) const { WriteFileBytes(path, Serialize()); }

WeightStore WeightStore::Load(const std::string& path) { return Deserialize(ReadFileBytes(path)); }

}  // namespace fmsc
