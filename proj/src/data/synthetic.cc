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
#include <numbers>

#include "fmsc/error.h"
#include "fmsc/field.h"

namespace fmsc::data {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> TravelingWave(const SyntheticSpec& s, uint64_t seed) {
  Rng rng(seed);
  const double theta = s.direction ? *s.direction : rng.Uniform(0.0, kTwoPi);
  const double a = std::cos(theta), b = std::sin(theta);
  struct Harmonic {
    double k, phase, weight;
  };
  std::vector<Harmonic> hs;
  for (int j = 0; j < s.harmonics; ++j) {
    const double wavelength = rng.Uniform(s.min_wavelength, s.max_wavelength);
    hs.push_back({kTwoPi / wavelength, rng.Uniform(0.0, kTwoPi), 1.0 / (1.0 + j)});
  }
  const auto& d = s.dims;
  std::vector<double> out(DimsNumel(d));
  size_t i = 0;
  for (int64_t t = 0; t < d[0]; ++t)
    for (int64_t h = 0; h < d[1]; ++h)
      for (int64_t w = 0; w < d[2]; ++w) {
        const double u = h * a + w * b - s.velocity * t;
        double v = 0.0;
        for (const auto& hm : hs) v += hm.weight * std::sin(hm.k * u + hm.phase);
        out[i++] = s.amplitude * v;
      }
  return out;
}

// Distance on a periodic axis of length n.
double Wrap(double x, double n) {
  x = std::fmod(x, n);
  if (x < -n / 2) x += n;
  if (x > n / 2) x -= n;
  return x;
}

std::vector<double> AdvectedBlobs(const SyntheticSpec& s, uint64_t seed) {
  Rng rng(seed);
  const auto& d = s.dims;
  struct Blob {
    double ch, cw, vh, vw, sigma, amp;
  };
  std::vector<Blob> blobs;
  for (int j = 0; j < s.blobs; ++j) {
    const double angle = rng.Uniform(0.0, kTwoPi);
    const double speed = s.velocity * rng.Uniform(0.5, 1.0);
    const double sign = rng.Uniform() < 0.5 ? -1.0 : 1.0;
    blobs.push_back({rng.Uniform(0.0, static_cast<double>(d[1])), rng.Uniform(0.0, static_cast<double>(d[2])),
                     speed * std::cos(angle), speed * std::sin(angle), s.blob_sigma * rng.Uniform(0.7, 1.3),
                     sign * s.amplitude * rng.Uniform(0.5, 1.0)});
  }
  std::vector<double> out(DimsNumel(d), 0.0);
  for (int64_t t = 0; t < d[0]; ++t)
    for (const Blob& bl : blobs) {
      const double ch = bl.ch + bl.vh * t, cw = bl.cw + bl.vw * t;
      const double inv = 1.0 / (2.0 * bl.sigma * bl.sigma);
      for (int64_t h = 0; h < d[1]; ++h) {
        const double dh = Wrap(h - ch, static_cast<double>(d[1]));
        double* row = out.data() + (t * d[1] + h) * d[2];
        for (int64_t w = 0; w < d[2]; ++w) {
          const double dw = Wrap(w - cw, static_cast<double>(d[2]));
          row[w] += bl.amp * std::exp(-(dh * dh + dw * dw) * inv);
        }
      }
    }
  return out;
}

}  // namespace

std::string SyntheticKindName(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::kTravelingWave: return "traveling_wave";
    case SyntheticKind::kAdvectedBlobs: return "advected_blobs";
    case SyntheticKind::kMixed: return "mixed";
  }
  return "?";
}

SyntheticKind SyntheticKindFromName(const std::string& name) {
  if (name == "traveling_wave") return SyntheticKind::kTravelingWave;
  if (name == "advected_blobs") return SyntheticKind::kAdvectedBlobs;
  if (name == "mixed") return SyntheticKind::kMixed;
  Fail(ErrorKind::kSpec, "unknown synthetic kind '" + name + "'");
}

FieldSeries SynthesizeDataset(const SyntheticSpec& spec) {
  Require(spec.dims[0] >= 1 && spec.dims[1] >= 1 && spec.dims[2] >= 1, ErrorKind::kSpec,
          "synthetic dims must be positive, got " + DimsString(spec.dims));
  Require(spec.harmonics >= 1 && spec.blobs >= 0 && spec.min_wavelength > 0 &&
              spec.max_wavelength >= spec.min_wavelength && spec.blob_sigma > 0,
          ErrorKind::kSpec, "invalid synthetic parameters");
  std::vector<double> v;
  switch (spec.kind) {
    case SyntheticKind::kTravelingWave:
      v = TravelingWave(spec, spec.seed);
      break;
    case SyntheticKind::kAdvectedBlobs:
      v = AdvectedBlobs(spec, spec.seed);
      break;
    case SyntheticKind::kMixed: {
      v = TravelingWave(spec, MixSeed(spec.seed, 1));
      const std::vector<double> b = AdvectedBlobs(spec, MixSeed(spec.seed, 2));
      for (size_t i = 0; i < v.size(); ++i) v[i] = 0.6 * v[i] + b[i];
      break;
    }
  }
  FieldSeries fs;
  fs.manifest.field_name = SyntheticKindName(spec.kind);
  fs.manifest.dims = spec.dims;
  fs.manifest.units = "arbitrary";
  fs.manifest.domain_tag = "synthetic/" + SyntheticKindName(spec.kind);
  fs.values.assign(v.begin(), v.end());
  return fs;
}

}  // namespace fmsc::data
