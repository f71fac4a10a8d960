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

#ifndef FMSC_TENSOR_H_
#define FMSC_TENSOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fmsc {

using Shape = std::vector<int64_t>;

std::string ShapeString(const Shape& shape);
int64_t ShapeNumel(const Shape& shape);

// Dense row-major double tensor. Feature maps are [C, H, W]; spatiotemporal
// volumes are [C, T, H, W]. Everything the network touches is 64-bit.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int axis) const { return shape_[axis < 0 ? axis + rank() : axis]; }
  size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  void Fill(double v);
  void Reshape(Shape shape);

  Tensor& operator+=(const Tensor& other);

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Channel slice [c0, c0 + count) of a tensor with channels on axis 0.
Tensor SliceChannels(const Tensor& t, int64_t c0, int64_t count);
// Writes src into channels [c0, c0 + src.dim(0)) of dst.
void AssignChannels(Tensor& dst, int64_t c0, const Tensor& src);

}  // namespace fmsc

#endif  // FMSC_TENSOR_H_
