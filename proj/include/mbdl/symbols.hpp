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

#ifndef MBDL_SYMBOLS_HPP
#define MBDL_SYMBOLS_HPP

#include <vector>

#include "mbdl/binary_image.hpp"

namespace mbdl {

/// One 8-connected foreground component, cut out at its tight bounding box.
/// The bitmap holds only this component's pixels; other components whose
/// boxes overlap read as background here.
struct Symbol {
    int id = 0;
    int row = 0;  ///< bounding-box top-left in the parent image
    int col = 0;
    BinaryImage bitmap;
    i64 fg_count = 0;   ///< foreground pixels in the bitmap
    i64 centroid_r_sum = 0;  ///< sum of foreground row indices (bitmap coords)
    i64 centroid_c_sum = 0;

    int width() const { return bitmap.width(); }
    int height() const { return bitmap.height(); }
};

/// All 8-connected foreground components, ordered by the raster position of
/// their bounding-box top-left corner (ties keep discovery order). Symbol
/// foregrounds are pairwise disjoint and their union is the image foreground.
std::vector<Symbol> extract_symbols(const BinaryImage& img);

/// Splits components into glyph-sized symbols and oversized generic content.
/// Generic components bypass the dictionary pipeline. Symbol ids are
/// renumbered contiguously in both lists.
struct SymbolPartition {
    std::vector<Symbol> symbols;
    std::vector<Symbol> generic;
};
SymbolPartition partition_symbols(std::vector<Symbol> all, i64 max_symbol_area);

/// OR a symbol bitmap back onto a canvas at its origin.
void paste_symbol(BinaryImage& canvas, const Symbol& sym);

/// Same origins, boxes and bitmaps, in the same order.
bool same_symbol_set(const std::vector<Symbol>& a, const std::vector<Symbol>& b);

} // namespace mbdl

#endif // MBDL_SYMBOLS_HPP
