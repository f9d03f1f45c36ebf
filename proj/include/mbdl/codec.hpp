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

#ifndef MBDL_CODEC_HPP
#define MBDL_CODEC_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbdl/adaptive_model.hpp"
#include "mbdl/binary_image.hpp"
#include "mbdl/dictionary.hpp"
#include "mbdl/restoration.hpp"
#include "mbdl/symbols.hpp"

namespace mbdl {

/// Stream layout (all multi-byte integers little-endian):
///   magic "MBDL", version u8 (=1)
///   u32 width, u32 height, u32 symbol_count, u32 dict_count
///   4 segments, each u32 byte length + payload:
///     0 dictionary: per entry, 16-bit dims then pixels under the causal
///       10-pixel model
///     1 placements: per symbol, entry id (adaptive bit-tree), origin deltas,
///       box-dims deltas vs the entry, and the registration offset
///     2 refinements: per symbol box position (first-covering order), the
///       image bit under its 10-bit reference context
///     3 residual: every pixel outside all symbol boxes, causal-coded
/// Trailing bytes after the last segment are rejected.
enum class CodecErrorKind {
    bad_magic,
    bad_version,
    truncated,
    segment_mismatch,
    trailing_bytes,
    corrupt,
};

class CodecError : public std::runtime_error {
public:
    CodecError(CodecErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    CodecErrorKind kind() const { return kind_; }

private:
    CodecErrorKind kind_;
};

/// Binary range coder (carry-propagating, 32-bit range). Probabilities come
/// from the shared adaptive BitModel counts, so encoder and decoder states
/// stay in lockstep bit for bit.
class ArithEncoder {
public:
    void encode_bit(BitModel& model, int bit);
    void encode_bit_raw(int bit);  ///< fixed half split, exactly 1 bit
    std::vector<u8> finish();
    u64 bits_coded() const { return bits_coded_; }

private:
    void shift_low();

    std::vector<u8> out_;
    u64 low_ = 0;
    u32 range_ = 0xFFFFFFFFu;
    u8 cache_ = 0;
    u64 cache_size_ = 1;
    u64 bits_coded_ = 0;
};

class ArithDecoder {
public:
    explicit ArithDecoder(std::span<const u8> data);
    int decode_bit(BitModel& model);
    int decode_bit_raw();

private:
    u8 next_byte();

    std::span<const u8> in_;
    usize pos_ = 0;
    u32 range_ = 0xFFFFFFFFu;
    u32 code_ = 0;
};

struct SegmentSizes {
    u64 dictionary_bytes = 0;
    u64 placement_bytes = 0;
    u64 refinement_bytes = 0;
    u64 residual_bytes = 0;
};

struct EncodeStats {
    SegmentSizes segments;
    u64 total_bytes = 0;
    int symbols = 0;
    int dict_entries = 0;
};

/// The dictionary segment payload alone (count comes from the container
/// header). Decodable standalone.
std::vector<u8> encode_dictionary(const Dictionary& dict);
Dictionary decode_dictionary(std::span<const u8> payload, u32 count);

/// Full lossless encode of x against the given dictionary/mapping. symbols
/// must be the symbol partition of x under max_symbol_area (verified; the
/// residual segment picks up everything else, including generic content).
std::vector<u8> encode_image(const BinaryImage& x, const Dictionary& dict,
                             const SymbolMapping& mapping,
                             const std::vector<Symbol>& symbols,
                             i64 max_symbol_area = 10000,
                             EncodeStats* stats = nullptr);

BinaryImage decode(std::span<const u8> bitstream);

enum class Mode { wxor_lossless, cee_lossless, mbir_mrf, mbir_dl };

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct CompressConfig {
    Mode mode = Mode::mbir_dl;
    RestorationConfig restoration;
};

struct CompressReport {
    Mode mode = Mode::mbir_dl;
    EncodeStats stats;
    u64 raw_bytes = 0;       ///< width*height/8, the uncompressed packed size
    double ratio = 0.0;      ///< raw_bytes / total_bytes, exact division
    int symbols = 0;
    int dict_entries = 0;
    /// sum of cee_bits over the encoded image's symbols under the adaptive
    /// count model replayed on that image (the coder's model, evolved over
    /// the offline reference contexts): the estimate the refinement segment
    /// must track.
    double refine_estimate_bits = 0.0;
    /// same sum under the static MAP phi re-estimated on the image; reported
    /// for diagnosis (the plug-in estimate is optimistic by the per-context
    /// learning cost).
    double refine_map_estimate_bits = 0.0;
    std::vector<TraceRow> trace;        ///< restoration trace (mbir modes)
    double max_cache_drift = 0.0;
    u64 restored_error_vs_input = 0;    ///< pixels changed by restoration
};

struct CompressResult {
    std::vector<u8> bitstream;
    BinaryImage encoded_image;  ///< what the bitstream decodes to
    CompressReport report;
};

/// Mode-dispatched pipeline: wxor/cee modes encode y as-is with the
/// respective dictionary; mbir modes restore first and encode the restored
/// image with the restoration's own dictionary.
CompressResult compress(const BinaryImage& y, const CompressConfig& config);

/// The code-length surrogate under the adaptive model: the coder's
/// count-based model replayed over the symbols' reference contexts in coding
/// order, independent of the canvas path the real segment uses.
double adaptive_refinement_estimate_bits(const std::vector<Symbol>& symbols,
                                         const Dictionary& dict,
                                         const SymbolMapping& mapping);

/// The plug-in surrogate: phi MAP-estimated on (x, dict, mapping), then
/// sum cee_bits over all symbols.
double refinement_estimate_bits(const std::vector<Symbol>& symbols,
                                const Dictionary& dict, const SymbolMapping& mapping);

} // namespace mbdl

#endif // MBDL_CODEC_HPP
