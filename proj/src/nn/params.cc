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

#include "fmsc/nn/params.h"

#include <algorithm>

#include "fmsc/error.h"

namespace fmsc::nn {

size_t ParamSet::Add(std::string name, Shape shape) {
  Require(!index_.contains(name), ErrorKind::kModel, "duplicate parameter name: " + name);
  Param p;
  p.name = name;
  p.shape = std::move(shape);
  p.value.assign(static_cast<size_t>(ShapeNumel(p.shape)), 0.0);
  p.grad.assign(p.value.size(), 0.0);
  params_.push_back(std::move(p));
  index_.emplace(std::move(name), params_.size() - 1);
  return params_.size() - 1;
}

std::optional<size_t> ParamSet::Find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void ParamSet::ZeroGrad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

void ParamSet::ScaleGrad(double factor) {
  for (auto& p : params_)
    for (double& g : p.grad) g *= factor;
}

size_t ParamSet::ScalarCount() const {
  size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

size_t ParamSet::ScalarCount(std::string_view prefix) const {
  size_t n = 0;
  for (const auto& p : params_)
    if (std::string_view(p.name).starts_with(prefix)) n += p.size();
  return n;
}

}  // namespace fmsc::nn
