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

#ifndef MBDL_PBM_HPP
#define MBDL_PBM_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbdl/binary_image.hpp"

namespace mbdl {

enum class PbmFormat { P1, P4 };

/// Parse error carrying the byte offset where parsing failed.
class PbmError : public std::runtime_error {
public:
    PbmError(const std::string& msg, usize offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}

    usize offset() const { return offset_; }

private:
    usize offset_;
};

/// Netpbm bitmaps: P1 (ascii) and P4 (packed, rows padded to byte
/// boundaries, MSB first). PBM "1" is black and maps to foreground.
/// When an expected format is given, a file in the other format is an error.
BinaryImage parse_pbm(std::span<const u8> bytes,
                      std::optional<PbmFormat> expect = std::nullopt);
std::vector<u8> serialize_pbm(const BinaryImage& img, PbmFormat format);

BinaryImage load_image(const std::filesystem::path& path,
                       std::optional<PbmFormat> expect = std::nullopt);
void save_image(const BinaryImage& img, const std::filesystem::path& path,
                PbmFormat format = PbmFormat::P4);

} // namespace mbdl

#endif // MBDL_PBM_HPP
