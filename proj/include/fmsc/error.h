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

#ifndef FMSC_ERROR_H_
#define FMSC_ERROR_H_

#include <stdexcept>
#include <string>

namespace fmsc {

enum class ErrorKind {
  kFormat,
  kData,
  kShape,
  kPad,
  kPartition,
  kSchedule,
  kSpec,
  kParameter,
  kTable,
  kCoding,
  kRecord,
  kBudget,
  kModel,
  kChecksum,
  kTraining,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void Require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) Fail(kind, message);
}

}  // namespace fmsc

#endif  // FMSC_ERROR_H_
