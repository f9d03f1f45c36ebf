// Copyright 2026 The mbdl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MBDL_COMMON_HPP
#define MBDL_COMMON_HPP

#include <cstddef>
#include <cstdint>

namespace mbdl {

using u8  = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i32 = std::int32_t;
using i64 = std::int64_t;
using usize = std::size_t;

/// splitmix64 step; used to derive independent sub-seeds from one master seed.
constexpr u64 mix64(u64 x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr u64 mix64(u64 a, u64 b) { return mix64(a ^ mix64(b)); }
constexpr u64 mix64(u64 a, u64 b, u64 c) { return mix64(mix64(a, b), c); }

} // namespace mbdl

#endif // MBDL_COMMON_HPP
