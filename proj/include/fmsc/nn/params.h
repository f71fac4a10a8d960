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

#ifndef FMSC_NN_PARAMS_H_
#define FMSC_NN_PARAMS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fmsc/tensor.h"

namespace fmsc::nn {

struct Param {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;

  size_t size() const { return value.size(); }
};

// Ordered collection of named trainable arrays. Layers refer to entries by
// index so the set stays copyable.
class ParamSet {
 public:
  size_t Add(std::string name, Shape shape);

  Param& at(size_t i) { return params_[i]; }
  const Param& at(size_t i) const { return params_[i]; }
  std::optional<size_t> Find(std::string_view name) const;

  size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void ZeroGrad();
  void ScaleGrad(double factor);
  size_t ScalarCount() const;
  size_t ScalarCount(std::string_view prefix) const;

 private:
  std::vector<Param> params_;
  std::map<std::string, size_t, std::less<>> index_;
};

}  // namespace fmsc::nn

#endif  // FMSC_NN_PARAMS_H_
