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

#ifndef MBDL_BINARY_IMAGE_HPP
#define MBDL_BINARY_IMAGE_HPP

#include <cassert>
#include <stdexcept>
#include <vector>

#include "mbdl/common.hpp"

namespace mbdl {

/// Bilevel raster, row-major, one byte per pixel (values 0/1).
/// Convention: 1 = foreground/ink, 0 = background. Reads outside the raster
/// return background (document margins are white).
///
/// Values are immutable for all readers once built; the restoration loop is
/// the single writer and mutates through set() on its private copy.
class BinaryImage {
public:
    BinaryImage() = default;

    BinaryImage(int width, int height, u8 fill = 0)
        : w_(width), h_(height),
          px_(static_cast<usize>(width) * static_cast<usize>(height), fill) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("BinaryImage: dimensions must be positive");
    }

    int width() const { return w_; }
    int height() const { return h_; }
    i64 area() const { return static_cast<i64>(w_) * h_; }
    bool empty() const { return px_.empty(); }

    u8 at(int r, int c) const {
        assert(in_bounds(r, c));
        return px_[static_cast<usize>(r) * w_ + c];
    }

    /// Boundary policy: out-of-bounds reads are background.
    u8 at_or_bg(int r, int c) const {
        return in_bounds(r, c) ? px_[static_cast<usize>(r) * w_ + c] : u8{0};
    }

    void set(int r, int c, u8 v) {
        assert(in_bounds(r, c));
        assert(v <= 1);
        px_[static_cast<usize>(r) * w_ + c] = v;
    }

    void flip(int r, int c) {
        assert(in_bounds(r, c));
        px_[static_cast<usize>(r) * w_ + c] ^= 1;
    }

    bool in_bounds(int r, int c) const {
        return r >= 0 && r < h_ && c >= 0 && c < w_;
    }

    const std::vector<u8>& pixels() const { return px_; }

    i64 foreground_count() const {
        i64 n = 0;
        for (u8 v : px_) n += v;
        return n;
    }

    bool operator==(const BinaryImage&) const = default;

private:
    int w_ = 0, h_ = 0;
    std::vector<u8> px_;
};

/// Count of positions where two equally sized rasters differ.
struct PixelDiff {
    u64 count = 0;
};

/// Number of differing pixels between a and b. Throws on dimension mismatch.
PixelDiff error_count(const BinaryImage& a, const BinaryImage& b);

BinaryImage complement(const BinaryImage& img);

} // namespace mbdl

#endif // MBDL_BINARY_IMAGE_HPP
