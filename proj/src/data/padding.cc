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

#include "fmsc/error.h"
#include "fmsc/field.h"

namespace fmsc::data {
namespace {

int64_t RoundUp(int64_t n, int64_t m) { return (n + m - 1) / m * m; }

// Source index for padded position i on an axis of length n.
int64_t MirrorIndex(int64_t i, int64_t n, bool edge) {
  if (i < n) return i;
  if (edge) return n - 1;
  return 2 * (n - 1) - i;
}

}  // namespace

nlohmann::json ToJson(const PadInfo& p) {
  return {{"t", {p.t.before, p.t.after}},
          {"h", {p.h.before, p.h.after}},
          {"w", {p.w.before, p.w.after}},
          {"edge_fallback", p.edge_fallback}};
}

PadInfo PadInfoFromJson(const nlohmann::json& j) {
  PadInfo p;
  try {
    auto axis = [&](const char* k) {
      const auto v = j.at(k).get<std::vector<int64_t>>();
      Require(v.size() == 2 && v[0] >= 0 && v[1] >= 0, ErrorKind::kFormat, "bad pad entry");
      return AxisPad{v[0], v[1]};
    };
    p.t = axis("t");
    p.h = axis("h");
    p.w = axis("w");
    p.edge_fallback = j.value("edge_fallback", false);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad pad info: ") + e.what());
  }
  return p;
}

std::pair<FieldSeries, PadInfo> ReflectPadTo(const FieldSeries& fs, const Dims& target) {
  const Dims& d = fs.dims();
  PadInfo info;
  info.t.after = std::max<int64_t>(0, target[0] - d[0]);
  info.h.after = std::max<int64_t>(0, target[1] - d[1]);
  info.w.after = std::max<int64_t>(0, target[2] - d[2]);
  // An axis that cannot be mirrored by the full amount repeats its edge.
  const bool edge_t = info.t.after > d[0] - 1;
  const bool edge_h = info.h.after > d[1] - 1;
  const bool edge_w = info.w.after > d[2] - 1;
  info.edge_fallback = edge_t || edge_h || edge_w;

  const Dims out_dims = {d[0] + info.t.after, d[1] + info.h.after, d[2] + info.w.after};
  FieldSeries out;
  out.manifest = fs.manifest;
  out.manifest.dims = out_dims;
  out.values.resize(DimsNumel(out_dims));
  size_t k = 0;
  for (int64_t t = 0; t < out_dims[0]; ++t) {
    const int64_t st = MirrorIndex(t, d[0], edge_t);
    for (int64_t h = 0; h < out_dims[1]; ++h) {
      const int64_t sh = MirrorIndex(h, d[1], edge_h);
      const float* row = fs.values.data() + fs.Index(st, sh, 0);
      for (int64_t w = 0; w < out_dims[2]; ++w) out.values[k++] = row[MirrorIndex(w, d[2], edge_w)];
    }
  }
  return {std::move(out), info};
}

std::pair<FieldSeries, PadInfo> ReflectPad(const FieldSeries& fs, const PadAlignment& align) {
  Require(align.t >= 1 && align.h >= 1 && align.w >= 1, ErrorKind::kPad, "alignment must be positive");
  const Dims& d = fs.dims();
  return ReflectPadTo(fs, {RoundUp(d[0], align.t), RoundUp(d[1], align.h), RoundUp(d[2], align.w)});
}

FieldSeries Unpad(const FieldSeries& fs, const PadInfo& p) {
  const Dims& d = fs.dims();
  const Dims out_dims = {d[0] - p.t.before - p.t.after, d[1] - p.h.before - p.h.after,
                         d[2] - p.w.before - p.w.after};
  Require(out_dims[0] >= 1 && out_dims[1] >= 1 && out_dims[2] >= 1, ErrorKind::kPad,
          "pad info inconsistent with dims " + DimsString(d));
  FieldSeries out;
  out.manifest = fs.manifest;
  out.manifest.dims = out_dims;
  out.values.resize(DimsNumel(out_dims));
  size_t k = 0;
  for (int64_t t = 0; t < out_dims[0]; ++t)
    for (int64_t h = 0; h < out_dims[1]; ++h) {
      const float* row = fs.values.data() + fs.Index(t + p.t.before, h + p.h.before, p.w.before);
      std::copy_n(row, out_dims[2], out.values.data() + k);
      k += out_dims[2];
    }
  return out;
}

}  // namespace fmsc::data
