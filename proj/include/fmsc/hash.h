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

#ifndef FMSC_HASH_H_
#define FMSC_HASH_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace fmsc {

using Digest = std::array<uint8_t, 32>;

Digest Sha256(std::span<const uint8_t> data);
std::string HexDigest(const Digest& d);
Digest DigestFromHex(const std::string& hex);
uint32_t Crc32(std::span<const uint8_t> data);

}  // namespace fmsc

#endif  // FMSC_HASH_H_
