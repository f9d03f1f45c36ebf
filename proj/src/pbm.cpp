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

#include "mbdl/pbm.hpp"

#include <fstream>

namespace mbdl {

namespace {

// Largest dimension / pixel count we accept from a file header.
constexpr i64 kMaxDim = 1 << 20;
constexpr i64 kMaxPixels = i64{1} << 28;

struct Cursor {
    std::span<const u8> data;
    usize pos = 0;

    bool eof() const { return pos >= data.size(); }
    u8 peek() const { return data[pos]; }
    u8 take() { return data[pos++]; }
};

bool is_pbm_space(u8 c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Whitespace and '#' comments between header tokens.
void skip_header_space(Cursor& cur) {
    while (!cur.eof()) {
        if (is_pbm_space(cur.peek())) {
            cur.take();
        } else if (cur.peek() == '#') {
            while (!cur.eof() && cur.take() != '\n') {}
        } else {
            break;
        }
    }
}

i64 parse_dim(Cursor& cur, const char* what) {
    skip_header_space(cur);
    if (cur.eof()) throw PbmError(std::string("missing ") + what, cur.pos);
    if (cur.peek() < '0' || cur.peek() > '9')
        throw PbmError(std::string("malformed ") + what, cur.pos);
    i64 v = 0;
    while (!cur.eof() && cur.peek() >= '0' && cur.peek() <= '9') {
        v = v * 10 + (cur.take() - '0');
        if (v > kMaxDim) throw PbmError(std::string(what) + " overflows", cur.pos);
    }
    return v;
}

} // namespace

BinaryImage parse_pbm(std::span<const u8> bytes, std::optional<PbmFormat> expect) {
    Cursor cur{bytes};
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '1' && bytes[1] != '4'))
        throw PbmError("not a PBM P1/P4 header", 0);
    const bool packed = bytes[1] == '4';
    if (expect && (*expect == PbmFormat::P4) != packed)
        throw PbmError("unexpected PBM variant", 1);
    cur.pos = 2;

    const i64 w = parse_dim(cur, "width");
    const i64 h = parse_dim(cur, "height");
    if (w <= 0 || h <= 0) throw PbmError("non-positive dimensions", cur.pos);
    if (w * h > kMaxPixels) throw PbmError("dimension overflow", cur.pos);

    BinaryImage img(static_cast<int>(w), static_cast<int>(h));
    if (packed) {
        // Exactly one whitespace byte separates the header from the payload.
        if (cur.eof() || !is_pbm_space(cur.peek()))
            throw PbmError("missing separator before P4 payload", cur.pos);
        cur.take();
        const usize row_bytes = static_cast<usize>((w + 7) / 8);
        if (bytes.size() - cur.pos < row_bytes * static_cast<usize>(h))
            throw PbmError("truncated P4 payload", bytes.size());
        for (int r = 0; r < h; ++r) {
            const u8* row = bytes.data() + cur.pos + static_cast<usize>(r) * row_bytes;
            for (int c = 0; c < w; ++c)
                img.set(r, c, (row[c >> 3] >> (7 - (c & 7))) & 1);
        }
        cur.pos += row_bytes * static_cast<usize>(h);
    } else {
        for (i64 i = 0; i < w * h; ++i) {
            skip_header_space(cur);
            if (cur.eof()) throw PbmError("truncated P1 payload", cur.pos);
            const u8 ch = cur.take();
            if (ch != '0' && ch != '1')
                throw PbmError("invalid P1 digit", cur.pos - 1);
            img.set(static_cast<int>(i / w), static_cast<int>(i % w), ch - '0');
        }
    }
    return img;
}

std::vector<u8> serialize_pbm(const BinaryImage& img, PbmFormat format) {
    std::string header = (format == PbmFormat::P4 ? "P4\n" : "P1\n");
    header += std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n";
    std::vector<u8> out(header.begin(), header.end());

    if (format == PbmFormat::P4) {
        const usize row_bytes = static_cast<usize>((img.width() + 7) / 8);
        for (int r = 0; r < img.height(); ++r) {
            usize base = out.size();
            out.resize(base + row_bytes, 0);
            for (int c = 0; c < img.width(); ++c)
                if (img.at(r, c)) out[base + (c >> 3)] |= u8(0x80 >> (c & 7));
        }
    } else {
        for (int r = 0; r < img.height(); ++r) {
            for (int c = 0; c < img.width(); ++c) {
                if (c) out.push_back(' ');
                out.push_back(img.at(r, c) ? '1' : '0');
            }
            out.push_back('\n');
        }
    }
    return out;
}

BinaryImage load_image(const std::filesystem::path& path,
                       std::optional<PbmFormat> expect) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::vector<u8> bytes{std::istreambuf_iterator<char>(f),
                          std::istreambuf_iterator<char>()};
    return parse_pbm(bytes, expect);
}

void save_image(const BinaryImage& img, const std::filesystem::path& path,
                PbmFormat format) {
    const auto bytes = serialize_pbm(img, format);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

} // namespace mbdl
