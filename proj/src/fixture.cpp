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

#include "mbdl/fixture.hpp"

#include <random>
#include <string_view>

#include "mbdl/pbm.hpp"

namespace mbdl {

namespace {

BinaryImage glyph_from_rows(std::initializer_list<std::string_view> rows) {
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(rows.begin()->size());
    BinaryImage g(w, h);
    int r = 0;
    for (std::string_view row : rows) {
        for (int c = 0; c < w; ++c)
            if (row[c] == '#') g.set(r, c, 1);
        ++r;
    }
    return g;
}

BinaryImage scale2x(const BinaryImage& g) {
    BinaryImage out(g.width() * 2, g.height() * 2);
    for (int r = 0; r < out.height(); ++r)
        for (int c = 0; c < out.width(); ++c)
            out.set(r, c, g.at(r / 2, c / 2));
    return out;
}

std::vector<BinaryImage> build_atlas() {
    std::vector<BinaryImage> atlas;

    // A plain vertical bar: the one-pixel-wide stroke case.
    atlas.push_back(glyph_from_rows({"#", "#", "#", "#", "#", "#", "#", "#", "#"}));

    atlas.push_back(glyph_from_rows({
        "..##..",
        ".#..#.",
        "#....#",
        "#....#",
        "######",
        "#....#",
        "#....#",
        "#....#",
        "#....#",
    }));
    atlas.push_back(glyph_from_rows({
        ".####.",
        "#....#",
        "#.....",
        "#.....",
        "#.....",
        "#.....",
        "#.....",
        "#....#",
        ".####.",
    }));
    atlas.push_back(glyph_from_rows({
        ".####.",
        "#....#",
        "#....#",
        "#....#",
        "#....#",
        "#....#",
        "#....#",
        "#....#",
        ".####.",
    }));
    atlas.push_back(glyph_from_rows({
        "######",
        "#.....",
        "#.....",
        "#####.",
        "#.....",
        "#.....",
        "#.....",
        "#.....",
        "######",
    }));
    atlas.push_back(glyph_from_rows({
        ".####.",
        "#....#",
        "#.....",
        ".#....",
        "..##..",
        "....#.",
        ".....#",
        "#....#",
        ".####.",
    }));
    atlas.push_back(glyph_from_rows({
        "#....#",
        "#....#",
        "#....#",
        "######",
        "#....#",
        "#....#",
        "#....#",
        "#....#",
        "#....#",
    }));
    atlas.push_back(glyph_from_rows({
        "#...#",
        "#..#.",
        "#.#..",
        "##...",
        "#.#..",
        "#..#.",
        "#...#",
        "#...#",
        "#...#",
    }));
    atlas.push_back(glyph_from_rows({
        "#....#",
        "##...#",
        "#.#..#",
        "#.#..#",
        "#..#.#",
        "#..#.#",
        "#...##",
        "#...##",
        "#....#",
    }));
    atlas.push_back(glyph_from_rows({
        "#####.",
        "#....#",
        "#....#",
        "#####.",
        "#..#..",
        "#...#.",
        "#...#.",
        "#....#",
        "#....#",
    }));
    atlas.push_back(glyph_from_rows({
        "..#..",
        "..#..",
        "..#..",
        "#####",
        "..#..",
        "..#..",
        "..#..",
        "..#..",
        "...##",
    }));
    atlas.push_back(glyph_from_rows({
        "#...#",
        "#...#",
        "#...#",
        "#...#",
        ".#.#.",
        ".#.#.",
        "..#..",
        "..#..",
        "..#..",
    }));
    atlas.push_back(glyph_from_rows({
        ".###.",
        "#...#",
        "....#",
        "...#.",
        "..#..",
        ".#...",
        "#....",
        "#....",
        "#####",
    }));
    atlas.push_back(glyph_from_rows({
        ".####",
        "#....",
        "#....",
        ".##..",
        "...#.",
        "....#",
        "....#",
        "#...#",
        ".###.",
    }));
    // Dotted glyph: extraction sees two components.
    atlas.push_back(glyph_from_rows({
        ".#.",
        "...",
        ".#.",
        ".#.",
        ".#.",
        ".#.",
        ".#.",
        ".#.",
        "###",
    }));

    // The main text size is the doubled face; the small originals appear on
    // occasional lines for size variety.
    const usize base = atlas.size();
    for (usize i = 1; i < base; ++i) atlas.push_back(scale2x(atlas[i]));
    return atlas;
}

} // namespace

const std::vector<BinaryImage>& fixture_glyph_atlas() {
    static const std::vector<BinaryImage> atlas = build_atlas();
    return atlas;
}

BinaryImage render_fixture_page(u64 seed, const FixturePageConfig& cfg) {
    const auto& atlas = fixture_glyph_atlas();
    std::mt19937_64 rng(mix64(seed, 0x9a6e2c64u));
    auto pick = [&rng](u64 n) { return static_cast<usize>(rng() % n); };

    BinaryImage page(cfg.width, cfg.height);
    const usize small_glyphs = 15;  // indices below this are base scale
    const usize bar_glyph = 0;      // the one-pixel-wide stroke

    int row = cfg.margin;
    int line_index = 0;
    while (true) {
        // Mostly the doubled face; every fifth line drops to the small one.
        const bool small = (line_index % 5) == 4;
        const usize lo = small ? 1 : small_glyphs;
        const usize hi = small ? small_glyphs : atlas.size();

        int line_height = 0;
        for (usize g = lo; g < hi; ++g)
            line_height = std::max(line_height, atlas[g].height());
        if (row + line_height > cfg.height - cfg.margin) break;

        if (cfg.allow_rules && line_index > 0 && line_index % 7 == 5) {
            // Horizontal rule: line art that is not a repeated glyph.
            const int rule_w = cfg.width - 2 * cfg.margin;
            for (int rr = 0; rr < 2; ++rr)
                for (int cc = 0; cc < rule_w; ++cc)
                    page.set(row + rr, cfg.margin + cc, 1);
            row += 2 + cfg.line_spacing;
            ++line_index;
            continue;
        }

        int col = cfg.margin;
        int word_left = 2 + static_cast<int>(pick(5));
        int glyphs_placed = 0;
        while (true) {
            // The unscaled bar mixes into big lines so every page keeps a
            // one-pixel-wide stroke.
            const bool use_bar = !small && glyphs_placed % 9 == 7;
            const BinaryImage& g =
                use_bar ? atlas[bar_glyph] : atlas[lo + pick(hi - lo)];
            if (col + g.width() > cfg.width - cfg.margin) break;
            // Baseline alignment at the line bottom.
            const int top = row + line_height - g.height();
            for (int r = 0; r < g.height(); ++r)
                for (int c = 0; c < g.width(); ++c)
                    if (g.at(r, c)) page.set(top + r, col + c, 1);
            col += g.width();
            ++glyphs_placed;
            if (--word_left <= 0) {
                col += cfg.word_gap;
                word_left = 2 + static_cast<int>(pick(5));
            } else {
                col += cfg.glyph_gap;
            }
        }
        row += line_height + cfg.line_spacing;
        ++line_index;
    }
    return page;
}

std::vector<BinaryImage> render_fixture_corpus(const std::filesystem::path& out_dir,
                                               int pages, u64 seed) {
    std::filesystem::create_directories(out_dir);
    std::vector<BinaryImage> out;
    out.reserve(static_cast<usize>(pages));
    for (int i = 0; i < pages; ++i) {
        BinaryImage page = render_fixture_page(mix64(seed, static_cast<u64>(i)));
        char name[32];
        std::snprintf(name, sizeof name, "page_%03d.pbm", i);
        save_image(page, out_dir / name, PbmFormat::P4);
        out.push_back(std::move(page));
    }
    return out;
}

} // namespace mbdl
