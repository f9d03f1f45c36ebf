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

#ifndef MBDL_FIXTURE_HPP
#define MBDL_FIXTURE_HPP

#include <filesystem>
#include <vector>

#include "mbdl/binary_image.hpp"

namespace mbdl {

/// The built-in glyph atlas used to render synthetic text pages: small
/// bilevel letterforms at two scales, including a bare one-pixel-wide
/// vertical stroke.
const std::vector<BinaryImage>& fixture_glyph_atlas();

struct FixturePageConfig {
    int width = 640;
    int height = 512;
    int margin = 28;
    int line_spacing = 17;   ///< extra background rows between lines
    int glyph_gap = 13;      ///< background columns between glyphs in a word
    int word_gap = 26;
    bool allow_rules = true; ///< occasional horizontal rule line art
};

/// Deterministic clean text-like page: seeded words of atlas glyphs, a scale
/// mix per line, every page has repeated glyphs and thin strokes.
BinaryImage render_fixture_page(u64 seed, const FixturePageConfig& cfg = {});

/// Writes page_000.pbm .. page_NNN.pbm (clean references for the benchmark)
/// and returns the rendered pages.
std::vector<BinaryImage> render_fixture_corpus(const std::filesystem::path& out_dir,
                                               int pages, u64 seed);

} // namespace mbdl

#endif // MBDL_FIXTURE_HPP
