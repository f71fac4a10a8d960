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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "fmsc/field.h"
#include "fmsc/random.h"
#include "test_util.h"

namespace fmsc::data {
namespace {

using testing::RandomFloats;
using testing::TempDir;

void WriteRaw(const std::string& path, const std::vector<float>& v, size_t extra = 0) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
  for (size_t i = 0; i < extra; ++i) out.put('\0');
}

FieldManifest Manifest(Dims dims) {
  FieldManifest m;
  m.field_name = "pressure";
  m.dims = dims;
  m.units = "Pa";
  m.domain_tag = "synthetic";
  return m;
}

TEST_CASE("load_field_series reads an exact-size file") {
  TempDir dir("load");
  const auto v = RandomFloats(8 * 64 * 64, 1);
  WriteRaw(dir.File("a.f32"), v);
  SaveManifest(Manifest({8, 64, 64}), dir.File("a.json"));
  const FieldSeries fs = LoadFieldSeries(dir.File("a.f32"), dir.File("a.json"));
  CHECK(fs.values.size() == 32768);
  CHECK(fs.values == v);
  CHECK(fs.manifest.units == "Pa");
  CHECK(fs.at(7, 63, 63) == v.back());
}

TEST_CASE("load_field_series rejects a file one byte too long") {
  TempDir dir("load_size");
  WriteRaw(dir.File("a.f32"), std::vector<float>(8 * 64 * 64, 0.0f), 1);
  SaveManifest(Manifest({8, 64, 64}), dir.File("a.json"));
  CHECK_FMSC_ERROR(LoadFieldSeries(dir.File("a.f32"), dir.File("a.json")), ErrorKind::kFormat);
}

TEST_CASE("load_field_series names the flat index of a NaN") {
  TempDir dir("load_nan");
  std::vector<float> v(8 * 64 * 64, 1.0f);
  v[12345] = std::numeric_limits<float>::quiet_NaN();
  WriteRaw(dir.File("a.f32"), v);
  SaveManifest(Manifest({8, 64, 64}), dir.File("a.json"));
  try {
    LoadFieldSeries(dir.File("a.f32"), dir.File("a.json"));
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
    CHECK(std::string(e.what()).find("12345") != std::string::npos);
  }
  v[12345] = std::numeric_limits<float>::infinity();
  WriteRaw(dir.File("a.f32"), v);
  CHECK_FMSC_ERROR(LoadFieldSeries(dir.File("a.f32"), dir.File("a.json")), ErrorKind::kData);
}

TEST_CASE("manifest validation and round trip") {
  TempDir dir("manifest");
  FieldManifest m = Manifest({3, 5, 7});
  SaveManifest(m, dir.File("m.json"));
  CHECK(LoadManifest(dir.File("m.json")) == m);
  nlohmann::json j = ToJson(m);
  j["dtype"] = "f64";
  CHECK_FMSC_ERROR(ManifestFromJson(j), ErrorKind::kFormat);
  j = ToJson(m);
  j["dims"] = {0, 5, 7};
  CHECK_FMSC_ERROR(ManifestFromJson(j), ErrorKind::kFormat);
}

TEST_CASE("save then load is bit exact") {
  TempDir dir("save");
  const FieldSeries fs = MakeField({2, 3, 4}, RandomFloats(24, 9), "temp");
  SaveFieldSeries(fs, dir.File("t.f32"), dir.File("t.json"));
  const FieldSeries back = LoadFieldSeries(dir.File("t.f32"), dir.File("t.json"));
  CHECK(back.values == fs.values);
  CHECK(back.manifest == fs.manifest);
}

TEST_CASE("normalize: two-point and symmetric cases") {
  auto [a, pa] = Normalize(MakeField({1, 1, 2}, {0.0f, 2.0f}));
  CHECK(pa.mean == 1.0);
  CHECK(pa.range == 2.0);
  CHECK(a.values == std::vector<float>{-0.5f, 0.5f});

  auto [b, pb] = Normalize(MakeField({1, 1, 3}, {-1.0f, 0.0f, 1.0f}));
  CHECK(pb.mean == 0.0);
  CHECK(pb.range == 2.0);
  CHECK(b.values == std::vector<float>{-0.5f, 0.0f, 0.5f});

  CHECK_FMSC_ERROR(Normalize(MakeField({1, 2, 2}, std::vector<float>(4, 3.7f))), ErrorKind::kData);
}

TEST_CASE("denormalize inverts normalize") {
  const FieldSeries back = Denormalize(MakeField({1, 1, 2}, {-0.5f, 0.5f}), {1.0, 2.0});
  CHECK(back.values == std::vector<float>{0.0f, 2.0f});
  const FieldSeries fives = Denormalize(MakeField({1, 2, 2}, std::vector<float>(4, 0.0f)), {5.0, 10.0});
  CHECK(std::all_of(fives.values.begin(), fives.values.end(), [](float v) { return v == 5.0f; }));
}

TEST_CASE("normalized field has zero mean and unit range") {
  const FieldSeries fs = MakeField({4, 16, 16}, RandomFloats(1024, 3, -50.0, 250.0));
  auto [n, p] = Normalize(fs);
  double mean = 0.0;
  for (float v : n.values) mean += v;
  mean /= static_cast<double>(n.values.size());
  const auto [lo, hi] = std::minmax_element(n.values.begin(), n.values.end());
  CHECK(std::abs(mean) < 1e-6);
  CHECK(std::abs((*hi - *lo) - 1.0) < 1e-6);
  const FieldSeries back = Denormalize(n, p);
  for (size_t i = 0; i < fs.values.size(); ++i)
    CHECK(std::abs(back.values[i] - fs.values[i]) <= 1e-6 * p.range);
}

TEST_CASE("reflect_pad rounds spatial axes to 64 and time to 8") {
  const FieldSeries fs = MakeField({8, 300, 402}, RandomFloats(8 * 300 * 402, 4));
  auto [padded, info] = ReflectPad(fs);
  CHECK(padded.dims() == Dims{8, 320, 448});
  CHECK(info.h == AxisPad{0, 20});
  CHECK(info.w == AxisPad{0, 46});
  CHECK(info.t == AxisPad{0, 0});
  CHECK_FALSE(info.edge_fallback);
  CHECK(Unpad(padded, info).values == fs.values);
}

TEST_CASE("reflect_pad leaves aligned fields alone") {
  const FieldSeries fs = MakeField({8, 256, 256}, RandomFloats(8 * 256 * 256, 5));
  auto [padded, info] = ReflectPad(fs);
  CHECK(padded.values == fs.values);
  CHECK(info == PadInfo{});
  CHECK(Unpad(fs, PadInfo{}).values == fs.values);
}

TEST_CASE("reflect_pad pads time from 6 to 8 frames") {
  const FieldSeries fs = MakeField({6, 64, 64}, RandomFloats(6 * 64 * 64, 6));
  auto [padded, info] = ReflectPad(fs);
  CHECK(padded.dims() == Dims{8, 64, 64});
  CHECK(info.t == AxisPad{0, 2});
  // Mirror without repeating the edge: frame 6 = frame 4, frame 7 = frame 3.
  for (int64_t h = 0; h < 64; h += 7) {
    CHECK(padded.at(6, h, 5) == fs.at(4, h, 5));
    CHECK(padded.at(7, h, 5) == fs.at(3, h, 5));
  }
  CHECK(Unpad(padded, info).values == fs.values);
}

TEST_CASE("reflect_pad falls back to edge replication on short axes") {
  const FieldSeries fs = MakeField({1, 2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
  auto [padded, info] = ReflectPad(fs);
  CHECK(padded.dims() == Dims{8, 64, 64});
  CHECK(info.edge_fallback);
  CHECK(Unpad(padded, info).values == fs.values);
}

TEST_CASE("unpad rejects inconsistent dims") {
  const FieldSeries fs = MakeField({8, 64, 64}, std::vector<float>(8 * 64 * 64, 0.0f));
  PadInfo p;
  p.h = {0, 100};
  CHECK_FMSC_ERROR(Unpad(fs, p), ErrorKind::kPad);
}

TEST_CASE("pad and unpad round trip on random shapes") {
  Rng rng(77);
  for (int i = 0; i < 40; ++i) {
    const Dims d = {1 + static_cast<int64_t>(rng.Below(12)), 2 + static_cast<int64_t>(rng.Below(90)),
                    2 + static_cast<int64_t>(rng.Below(90))};
    const FieldSeries fs = MakeField(d, RandomFloats(static_cast<size_t>(DimsNumel(d)), 100 + i));
    auto [padded, info] = ReflectPad(fs);
    CHECK(padded.dims()[0] % 8 == 0);
    CHECK(padded.dims()[1] % 64 == 0);
    CHECK(padded.dims()[2] % 64 == 0);
    CHECK(Unpad(padded, info).values == fs.values);
    CHECK(PadInfoFromJson(ToJson(info)) == info);
  }
}

TEST_CASE("partition_blocks tiles the field") {
  const FieldSeries fs = MakeField({8, 256, 256}, RandomFloats(8 * 256 * 256, 7));
  const auto blocks = PartitionBlocks(fs, 128, 128);
  CHECK(blocks.size() == 4);
  CHECK(ReassembleBlocks(blocks, fs.dims()).values == fs.values);

  const FieldSeries tall = MakeField({16, 256, 256}, RandomFloats(16 * 256 * 256, 8));
  const auto tb = PartitionBlocks(tall, 256, 256);
  CHECK(tb.size() == 2);
  CHECK(tb[1].origin == Dims{8, 0, 0});

  CHECK_FMSC_ERROR(PartitionBlocks(fs, 100, 100), ErrorKind::kPartition);
  CHECK_FMSC_ERROR(PartitionBlocks(fs, 192, 192), ErrorKind::kPartition);
}

TEST_CASE("reassemble_blocks detects gaps and overlaps, ignores order") {
  const FieldSeries fs = MakeField({8, 256, 256}, RandomFloats(8 * 256 * 256, 9));
  auto blocks = PartitionBlocks(fs, 128, 128);
  auto missing = blocks;
  missing.pop_back();
  CHECK_FMSC_ERROR(ReassembleBlocks(missing, fs.dims()), ErrorKind::kPartition);
  auto doubled = blocks;
  doubled.back() = doubled.front();
  CHECK_FMSC_ERROR(ReassembleBlocks(doubled, fs.dims()), ErrorKind::kPartition);
  std::reverse(blocks.begin(), blocks.end());
  std::swap(blocks[0], blocks[2]);
  CHECK(ReassembleBlocks(blocks, fs.dims()).values == fs.values);
}

TEST_CASE("random crops") {
  SUBCASE("single valid origin") {
    const FieldSeries fs = MakeField({8, 256, 256}, RandomFloats(8 * 256 * 256, 10));
    RandomCropSampler s(fs, 3);
    for (int i = 0; i < 3; ++i) {
      const auto b = s.Next();
      CHECK(b.origin == Dims{0, 0, 0});
      CHECK(b.values == fs.values);
    }
  }
  SUBCASE("reproducible origins") {
    const FieldSeries fs = MakeField({8, 512, 512}, RandomFloats(8 * 512 * 512, 11));
    RandomCropSampler a(fs, 42), b(fs, 42);
    std::set<Dims> seen;
    for (int i = 0; i < 20; ++i) {
      const auto ba = a.Next(), bb = b.Next();
      CHECK(ba.origin == bb.origin);
      CHECK(ba.dims == Dims{8, 256, 256});
      CHECK(ba.origin[1] <= 256);
      CHECK(ba.origin[2] <= 256);
      seen.insert(ba.origin);
    }
    CHECK(seen.size() > 10);
  }
  SUBCASE("small fields are padded to the crop first") {
    const FieldSeries fs = MakeField({8, 128, 128}, RandomFloats(8 * 128 * 128, 12));
    RandomCropSampler s(fs, 1);
    CHECK(s.field().dims() == Dims{8, 256, 256});
    const auto b = s.Next();
    CHECK(b.dims == Dims{8, 256, 256});
    CHECK(b.values[0] == fs.values[0]);
  }
}

TEST_CASE("balance_schedule") {
  CHECK(BalanceSchedule({10, 4}) == std::vector<int64_t>{1, 3});
  CHECK(BalanceSchedule({5, 5}) == std::vector<int64_t>{1, 1});
  CHECK(BalanceSchedule({1, 7}) == std::vector<int64_t>{7, 1});
  CHECK_FMSC_ERROR(BalanceSchedule({}), ErrorKind::kSchedule);
  CHECK_FMSC_ERROR(BalanceSchedule({3, 0}), ErrorKind::kSchedule);

  const auto sizes = std::vector<int64_t>{10, 4, 1};
  const auto r = BalanceSchedule(sizes);
  for (size_t i = 0; i < sizes.size(); ++i) CHECK(sizes[i] * r[i] >= 10);

  const auto epoch = BalancedEpoch({10, 4}, 5);
  CHECK(epoch.size() == 20);
  CHECK(std::count(epoch.begin(), epoch.end(), 0) == 10);
  CHECK(std::count(epoch.begin(), epoch.end(), 1) == 10);
  CHECK(BalancedEpoch({10, 4}, 5) == epoch);
}

TEST_CASE("synthesize_dataset") {
  SyntheticSpec s;
  s.dims = {8, 64, 64};
  s.seed = 17;
  const FieldSeries a = SynthesizeDataset(s);
  CHECK(SynthesizeDataset(s).values == a.values);
  s.seed = 18;
  CHECK(SynthesizeDataset(s).values != a.values);

  s.amplitude = 0.0;
  const FieldSeries flat = SynthesizeDataset(s);
  CHECK(std::all_of(flat.values.begin(), flat.values.end(), [&](float v) { return v == flat.values[0]; }));
  CHECK_FMSC_ERROR(Normalize(flat), ErrorKind::kData);

  CHECK_FMSC_ERROR(SyntheticKindFromName("vortex"), ErrorKind::kSpec);
  for (auto k : {SyntheticKind::kTravelingWave, SyntheticKind::kAdvectedBlobs, SyntheticKind::kMixed})
    CHECK(SyntheticKindFromName(SyntheticKindName(k)) == k);
}

TEST_CASE("traveling wave advances by its velocity each frame") {
  SyntheticSpec s;
  s.kind = SyntheticKind::kTravelingWave;
  s.dims = {4, 32, 48};
  s.seed = 5;
  s.direction = 0.0;  // along +h
  s.velocity = 2.0;
  const FieldSeries fs = SynthesizeDataset(s);
  double worst = 0.0;
  for (int64_t t = 0; t + 1 < 4; ++t)
    for (int64_t h = 2; h < 32; ++h)
      for (int64_t w = 0; w < 48; ++w)
        worst = std::max(worst, static_cast<double>(std::abs(fs.at(t + 1, h, w) - fs.at(t, h - 2, w))));
  CHECK(worst <= 1e-3);
}

TEST_CASE("advected blobs are smooth and bounded") {
  SyntheticSpec s;
  s.kind = SyntheticKind::kAdvectedBlobs;
  s.dims = {8, 64, 64};
  const FieldSeries fs = SynthesizeDataset(s);
  for (float v : fs.values) CHECK(std::isfinite(v));
  auto [n, p] = Normalize(fs);
  CHECK(p.range > 0.0);
}

}  // namespace
}  // namespace fmsc::data
