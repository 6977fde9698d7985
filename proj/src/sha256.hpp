// Copyright 2026 the prsp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRSP_SHA256_HPP
#define PRSP_SHA256_HPP

#include <cstdint>
#include <span>
#include <string>

namespace prsp {

// FIPS 180-4 SHA-256, self-contained so data digests carry no library
// dependency. Returns the lowercase hex digest.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex_file(const std::string& path);

}  // namespace prsp

#endif  // PRSP_SHA256_HPP
