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

#include "mbdl/binary_image.hpp"

namespace mbdl {

PixelDiff error_count(const BinaryImage& a, const BinaryImage& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("error_count: dimension mismatch");
    u64 n = 0;
    const auto& pa = a.pixels();
    const auto& pb = b.pixels();
    for (usize i = 0; i < pa.size(); ++i) n += pa[i] != pb[i];
    return PixelDiff{n};
}

BinaryImage complement(const BinaryImage& img) {
    BinaryImage out(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c)
            out.set(r, c, img.at(r, c) ^ 1);
    return out;
}

} // namespace mbdl
