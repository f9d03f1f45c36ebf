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

#ifndef MBDL_ADAPTIVE_MODEL_HPP
#define MBDL_ADAPTIVE_MODEL_HPP

#include <cmath>

#include "mbdl/common.hpp"

namespace mbdl {

/// One adaptive binary probability estimate: counts start at (1,1), the
/// observed side grows by kAdaptIncrement per coded bit, and both halve at
/// kAdaptCap so the estimate keeps tracking. The same model drives the
/// arithmetic coder and the offline code-length estimates, which is what
/// keeps estimated and coded sizes in agreement.
struct BitModel {
    static constexpr u32 kAdaptIncrement = 8;
    static constexpr u32 kAdaptCap = 1u << 16;

    u32 c0 = 1;
    u32 c1 = 1;

    /// P(bit = 0) scaled to 16 bits, clamped away from 0 and 1.
    u32 prob0_16() const {
        u64 p = (static_cast<u64>(c0) << 16) / (c0 + c1);
        if (p < 1) p = 1;
        if (p > 0xFFFF) p = 0xFFFF;
        return static_cast<u32>(p);
    }

    /// Ideal code length of the given bit under the current (quantized)
    /// estimate, in bits.
    double cost_bits(int bit) const {
        const double p0 = static_cast<double>(prob0_16()) * 0x1.0p-16;
        return -std::log2(bit ? 1.0 - p0 : p0);
    }

    void update(int bit) {
        if (bit)
            c1 += kAdaptIncrement;
        else
            c0 += kAdaptIncrement;
        if (c0 + c1 >= kAdaptCap) {
            c0 = (c0 + 1) >> 1;
            c1 = (c1 + 1) >> 1;
        }
    }
};

} // namespace mbdl

#endif // MBDL_ADAPTIVE_MODEL_HPP
