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

#include "fmsc/tensor.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fmsc/error.h"
#include "fmsc/random.h"

namespace fmsc {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kData: return "data";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kPad: return "pad";
    case ErrorKind::kPartition: return "partition";
    case ErrorKind::kSchedule: return "schedule";
    case ErrorKind::kSpec: return "spec";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kTable: return "table";
    case ErrorKind::kCoding: return "coding";
    case ErrorKind::kRecord: return "record";
    case ErrorKind::kBudget: return "budget";
    case ErrorKind::kModel: return "model";
    case ErrorKind::kChecksum: return "checksum";
    case ErrorKind::kTraining: return "training";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

int64_t ShapeNumel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(static_cast<size_t>(ShapeNumel(shape_)), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  Require(static_cast<int64_t>(data_.size()) == ShapeNumel(shape_), ErrorKind::kShape,
          "tensor value count does not match shape " + ShapeString(shape_));
}

void Tensor::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::Reshape(Shape shape) {
  Require(ShapeNumel(shape) == static_cast<int64_t>(data_.size()), ErrorKind::kShape,
          "cannot reshape " + ShapeString(shape_) + " to " + ShapeString(shape));
  shape_ = std::move(shape);
}

Tensor& Tensor::operator+=(const Tensor& other) {
  Require(shape_ == other.shape_, ErrorKind::kShape,
          "shape mismatch in add: " + ShapeString(shape_) + " vs " + ShapeString(other.shape_));
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor SliceChannels(const Tensor& t, int64_t c0, int64_t count) {
  Shape s = t.shape();
  const int64_t plane = ShapeNumel(s) / s[0];
  s[0] = count;
  Tensor out(s);
  std::copy_n(t.data() + c0 * plane, count * plane, out.data());
  return out;
}

void AssignChannels(Tensor& dst, int64_t c0, const Tensor& src) {
  const int64_t plane = ShapeNumel(dst.shape()) / dst.dim(0);
  std::copy_n(src.data(), src.size(), dst.data() + c0 * plane);
}

double Rng::Normal() {
  // Box-Muller; one value per call keeps the stream position simple.
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t MixSeed(uint64_t seed, uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace fmsc
