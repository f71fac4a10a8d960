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

#ifndef FMSC_TESTS_UNIT_TEST_UTIL_H_
#define FMSC_TESTS_UNIT_TEST_UTIL_H_

#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "fmsc/error.h"
#include "fmsc/random.h"
#include "fmsc/tensor.h"

namespace fmsc::testing {

// Checks that expr throws fmsc::Error of the given kind.
#define CHECK_FMSC_ERROR(expr, error_kind)                       \
  do {                                                          \
    bool thrown_ = false;                                       \
    try {                                                       \
      (void)(expr);                                             \
    } catch (const ::fmsc::Error& e_) {                         \
      thrown_ = true;                                           \
      CHECK_MESSAGE(e_.kind() == (error_kind), std::string(e_.what()));    \
    }                                                           \
    CHECK_MESSAGE(thrown_, "expected an fmsc::Error: " #expr);  \
  } while (0)

inline Tensor RandomTensor(Shape shape, uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = scale * rng.Uniform(-1.0, 1.0);
  return t;
}

inline std::vector<float> RandomFloats(size_t n, uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.Uniform(lo, hi));
  return v;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("fmsc_" + tag + "_" + std::to_string(reinterpret_cast<uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string File(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fmsc::testing

#endif  // FMSC_TESTS_UNIT_TEST_UTIL_H_
