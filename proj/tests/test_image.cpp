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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>

#include "mbdl/binary_image.hpp"
#include "mbdl/pbm.hpp"
#include "mbdl/symbols.hpp"
#include "test_oracles.hpp"

using namespace mbdl;
using namespace mbdl::testing;

namespace {
std::vector<u8> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }
}

TEST_CASE("pbm parses a minimal P1 file") {
    const BinaryImage img = parse_pbm(bytes_of("P1\n1 1\n1"));
    CHECK(img.width() == 1);
    CHECK(img.height() == 1);
    CHECK(img.at(0, 0) == 1);
}

TEST_CASE("pbm parses a one-byte all-zero P4 row") {
    std::vector<u8> data = bytes_of("P4\n8 1\n");
    data.push_back(0x00);
    const BinaryImage img = parse_pbm(data);
    CHECK(img.width() == 8);
    CHECK(img.foreground_count() == 0);
}

TEST_CASE("pbm serializes all-background and all-foreground payloads") {
    const auto bg = serialize_pbm(BinaryImage(16, 16), PbmFormat::P4);
    const std::string header = "P4\n16 16\n";
    REQUIRE(bg.size() == header.size() + 32);
    for (usize i = header.size(); i < bg.size(); ++i) CHECK(bg[i] == 0x00);

    const auto fg = serialize_pbm(BinaryImage(8, 8, 1), PbmFormat::P4);
    const std::string header2 = "P4\n8 8\n";
    REQUIRE(fg.size() == header2.size() + 8);
    for (usize i = header2.size(); i < fg.size(); ++i) CHECK(fg[i] == 0xFF);
}

TEST_CASE("pbm round-trips random rasters, including non-byte-aligned widths") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 40);
        const int h = 1 + static_cast<int>(rng() % 20);
        const BinaryImage img = random_image(w, h, 0.4, rng);
        for (PbmFormat fmt : {PbmFormat::P4, PbmFormat::P1}) {
            const auto data = serialize_pbm(img, fmt);
            CHECK(parse_pbm(data) == img);
            // canonical bytes are a fixed point of parse/serialize
            CHECK(serialize_pbm(parse_pbm(data), fmt) == data);
        }
    }
    std::mt19937_64 rng2(12);
    const BinaryImage img = random_image(33, 7, 0.5, rng2);
    CHECK(parse_pbm(serialize_pbm(img, PbmFormat::P4)) == img);
}

TEST_CASE("pbm enforces an expected variant when given") {
    CHECK_NOTHROW(parse_pbm(bytes_of("P1\n1 1\n1"), PbmFormat::P1));
    CHECK_THROWS_AS(parse_pbm(bytes_of("P1\n1 1\n1"), PbmFormat::P4), PbmError);
}

TEST_CASE("pbm reports malformed input with byte offsets") {
    CHECK_THROWS_AS(parse_pbm(bytes_of("P5\n1 1\n")), PbmError);
    CHECK_THROWS_AS(parse_pbm(bytes_of("P4\n1\n")), PbmError);
    CHECK_THROWS_AS(parse_pbm(bytes_of("P4\n0 4\n")), PbmError);
    CHECK_THROWS_AS(parse_pbm(bytes_of("P4\n99999999 99999999\n")), PbmError);
    CHECK_THROWS_AS(parse_pbm(bytes_of("P1\n2 2\n1 0 1")), PbmError);  // truncated
    SUBCASE("truncated P4 payload carries an offset") {
        std::vector<u8> data = bytes_of("P4\n16 2\n");
        data.push_back(0xAA);  // needs 4 bytes
        try {
            parse_pbm(data);
            FAIL("expected PbmError");
        } catch (const PbmError& e) {
            CHECK(e.offset() == data.size());
            CHECK(std::string(e.what()).find("byte") != std::string::npos);
        }
    }
}

TEST_CASE("error_count matches the positionwise oracle and its axioms") {
    std::mt19937_64 rng(21);
    const BinaryImage a = random_image(19, 13, 0.5, rng);
    const BinaryImage b = random_image(19, 13, 0.5, rng);
    const BinaryImage c = random_image(19, 13, 0.5, rng);

    CHECK(error_count(a, a).count == 0);
    CHECK(error_count(a, b).count == brute_error_count(a, b));
    CHECK(error_count(a, b).count == error_count(b, a).count);
    CHECK(error_count(a, c).count <= error_count(a, b).count + error_count(b, c).count);

    const BinaryImage d(4, 4);
    CHECK(error_count(d, complement(d)).count == 16);
    CHECK_THROWS_AS(error_count(a, BinaryImage(5, 5)), std::invalid_argument);
}

TEST_CASE("extract_symbols uses 8-connectivity and raster order") {
    SUBCASE("empty image") {
        CHECK(extract_symbols(BinaryImage(10, 10)).empty());
    }
    SUBCASE("diagonal pixels form one symbol") {
        BinaryImage img(4, 4);
        img.set(1, 1, 1);
        img.set(2, 2, 1);
        const auto syms = extract_symbols(img);
        REQUIRE(syms.size() == 1);
        CHECK(syms[0].fg_count == 2);
        CHECK(syms[0].row == 1);
        CHECK(syms[0].col == 1);
    }
    SUBCASE("a rendered line of separated glyphs") {
        BinaryImage img(80, 8);
        for (int g = 0; g < 12; ++g) {
            const int base = 2 + g * 6;  // 4 wide, 2 background columns apart
            for (int r = 2; r < 6; ++r)
                for (int c = base; c < base + 4; ++c) img.set(r, c, 1);
        }
        const auto syms = extract_symbols(img);
        REQUIRE(syms.size() == 12);
        for (usize i = 1; i < syms.size(); ++i) CHECK(syms[i - 1].col < syms[i].col);
    }
}

TEST_CASE("symbols partition the foreground and reassemble the image") {
    std::mt19937_64 rng(31);
    const BinaryImage img = random_image(60, 40, 0.25, rng);
    const auto syms = extract_symbols(img);

    i64 total_fg = 0;
    for (const Symbol& s : syms) {
        total_fg += s.fg_count;
        CHECK(s.fg_count == s.bitmap.foreground_count());
        // tight box: the component touches all four edges
        bool top = false, bottom = false, left = false, right = false;
        for (int c = 0; c < s.width(); ++c) {
            top = top || s.bitmap.at(0, c);
            bottom = bottom || s.bitmap.at(s.height() - 1, c);
        }
        for (int r = 0; r < s.height(); ++r) {
            left = left || s.bitmap.at(r, 0);
            right = right || s.bitmap.at(r, s.width() - 1);
        }
        CHECK(top);
        CHECK(bottom);
        CHECK(left);
        CHECK(right);
    }
    CHECK(total_fg == img.foreground_count());

    BinaryImage rebuilt(img.width(), img.height());
    for (const Symbol& s : syms) paste_symbol(rebuilt, s);
    CHECK(rebuilt == img);

    const auto again = extract_symbols(rebuilt);
    CHECK(same_symbol_set(syms, again));
}

TEST_CASE("partition_symbols classifies oversized boxes as generic") {
    BinaryImage img(120, 80);
    for (int r = 10; r < 60; ++r)
        for (int c = 10; c < 110; ++c) img.set(r, c, 1);  // 100x50 blob
    img.set(70, 5, 1);                                    // lone dot
    auto part = partition_symbols(extract_symbols(img), 1000);
    CHECK(part.generic.size() == 1);
    CHECK(part.symbols.size() == 1);

    SUBCASE("generic content reaching into a symbol box is promoted") {
        BinaryImage img2(140, 80);
        // big blob with a thin spike sticking out to the right
        for (int r = 10; r < 60; ++r)
            for (int c = 10; c < 110; ++c) img2.set(r, c, 1);
        for (int c = 110; c < 116; ++c) img2.set(30, c, 1);
        // a C-shaped symbol wrapped around the spike tip: its box contains
        // spike foreground that belongs to the blob component
        for (int c = 112; c < 118; ++c) {
            img2.set(28, c, 1);
            img2.set(32, c, 1);
        }
        for (int r = 28; r <= 32; ++r) img2.set(r, 117, 1);
        auto part2 = partition_symbols(extract_symbols(img2), 1000);
        CHECK(part2.generic.empty());
        CHECK(part2.symbols.size() == 2);
    }
}
