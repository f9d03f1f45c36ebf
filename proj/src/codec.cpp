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

#include "mbdl/codec.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>

namespace mbdl {

namespace {

constexpr char kMagic[4] = {'M', 'B', 'D', 'L'};
constexpr u8 kVersion = 1;
constexpr i64 kMaxPixels = i64{1} << 28;
constexpr u32 kMaxSymbols = 1u << 22;
constexpr i64 kMaxDictPixels = i64{1} << 28;
constexpr i64 kMaxAlign = 1 << 20;

} // namespace

// ---------------------------------------------------------------------------
// Range coder
// ---------------------------------------------------------------------------

void ArithEncoder::encode_bit(BitModel& model, int bit) {
    const u32 bound = (range_ >> 16) * model.prob0_16();
    if (bit == 0) {
        range_ = bound;
    } else {
        low_ += bound;
        range_ -= bound;
    }
    model.update(bit);
    while (range_ < (1u << 24)) {
        shift_low();
        range_ <<= 8;
    }
    ++bits_coded_;
}

void ArithEncoder::encode_bit_raw(int bit) {
    const u32 bound = (range_ >> 16) << 15;
    if (bit == 0) {
        range_ = bound;
    } else {
        low_ += bound;
        range_ -= bound;
    }
    while (range_ < (1u << 24)) {
        shift_low();
        range_ <<= 8;
    }
    ++bits_coded_;
}

void ArithEncoder::shift_low() {
    if (static_cast<u32>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
        const u8 carry = static_cast<u8>(low_ >> 32);
        out_.push_back(static_cast<u8>(cache_ + carry));
        while (--cache_size_ != 0) out_.push_back(static_cast<u8>(0xFF + carry));
        cache_ = static_cast<u8>(low_ >> 24);
    }
    ++cache_size_;
    low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<u8> ArithEncoder::finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
}

ArithDecoder::ArithDecoder(std::span<const u8> data) : in_(data) {
    next_byte();  // the encoder's initial zero cache byte
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

u8 ArithDecoder::next_byte() {
    if (pos_ >= in_.size())
        throw CodecError(CodecErrorKind::truncated, "arithmetic stream exhausted");
    return in_[pos_++];
}

int ArithDecoder::decode_bit_raw() {
    const u32 bound = (range_ >> 16) << 15;
    int bit;
    if (code_ < bound) {
        range_ = bound;
        bit = 0;
    } else {
        code_ -= bound;
        range_ -= bound;
        bit = 1;
    }
    while (range_ < (1u << 24)) {
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
    return bit;
}

int ArithDecoder::decode_bit(BitModel& model) {
    const u32 bound = (range_ >> 16) * model.prob0_16();
    int bit;
    if (code_ < bound) {
        range_ = bound;
        bit = 0;
    } else {
        code_ -= bound;
        range_ -= bound;
        bit = 1;
    }
    model.update(bit);
    while (range_ < (1u << 24)) {
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
    return bit;
}

// ---------------------------------------------------------------------------
// Adaptive integer coding (Elias-gamma-like, zigzag for signed values)
// ---------------------------------------------------------------------------

namespace {

struct VarintCtx {
    std::array<BitModel, 24> len;
    std::array<BitModel, 24> val;
};

u64 zigzag(i64 v) {
    return (static_cast<u64>(v) << 1) ^ static_cast<u64>(v >> 63);
}

i64 unzigzag(u64 u) {
    return static_cast<i64>(u >> 1) ^ -static_cast<i64>(u & 1);
}

void encode_varuint(ArithEncoder& enc, VarintCtx& ctx, u64 v) {
    const int n = std::bit_width(v + 1);
    for (int i = 0; i + 1 < n; ++i) enc.encode_bit(ctx.len[std::min(i, 23)], 1);
    enc.encode_bit(ctx.len[std::min(n - 1, 23)], 0);
    for (int i = n - 2; i >= 0; --i)
        enc.encode_bit(ctx.val[std::min(i, 23)], static_cast<int>(((v + 1) >> i) & 1));
}

u64 decode_varuint(ArithDecoder& dec, VarintCtx& ctx) {
    int n = 1;
    while (dec.decode_bit(ctx.len[std::min(n - 1, 23)])) {
        if (++n > 62)
            throw CodecError(CodecErrorKind::corrupt, "varint length overflow");
    }
    u64 v = 1;
    for (int i = n - 2; i >= 0; --i)
        v = (v << 1) | static_cast<u64>(dec.decode_bit(ctx.val[std::min(i, 23)]));
    return v - 1;
}

void encode_varint(ArithEncoder& enc, VarintCtx& ctx, i64 v) {
    encode_varuint(enc, ctx, zigzag(v));
}

i64 decode_varint(ArithDecoder& dec, VarintCtx& ctx) {
    return unzigzag(decode_varuint(dec, ctx));
}

// ---------------------------------------------------------------------------
// Little-endian container plumbing
// ---------------------------------------------------------------------------

void put_u32(std::vector<u8>& out, u32 v) {
    out.push_back(static_cast<u8>(v));
    out.push_back(static_cast<u8>(v >> 8));
    out.push_back(static_cast<u8>(v >> 16));
    out.push_back(static_cast<u8>(v >> 24));
}

u32 get_u32(std::span<const u8> in, usize& pos) {
    if (pos + 4 > in.size())
        throw CodecError(CodecErrorKind::truncated, "container truncated");
    const u32 v = static_cast<u32>(in[pos]) | (static_cast<u32>(in[pos + 1]) << 8) |
                  (static_cast<u32>(in[pos + 2]) << 16) |
                  (static_cast<u32>(in[pos + 3]) << 24);
    pos += 4;
    return v;
}

struct PlacementRecord {
    int entry = 0;
    int row = 0, col = 0;
    int width = 0, height = 0;
    Alignment align;
};

// Registration offsets are coded against the concentric-box prediction
// (half the dimension difference, halves toward the top-left), which is
// what centroid alignment yields for a well-matched entry.
int predicted_align(int entry_dim, int sym_dim) {
    const int delta2 = 2 * (entry_dim - sym_dim) + 1;
    return delta2 >= 0 ? delta2 / 4 : -((-delta2 + 3) / 4);
}

} // namespace

// ---------------------------------------------------------------------------
// Dictionary segment
// ---------------------------------------------------------------------------

std::vector<u8> encode_dictionary(const Dictionary& dict) {
    // Each entry is coded standalone: raw 16-bit dims and fresh adaptive
    // contexts, exactly the model entry_cost_bits prices. The dictionary
    // penalty in the learning objective therefore matches what the segment
    // actually pays.
    ArithEncoder enc;
    std::vector<BitModel> gen(kContextCount);
    for (const DictionaryEntry& e : dict.entries) {
        const int w = e.bitmap.width(), h = e.bitmap.height();
        if (w > 0xFFFF || h > 0xFFFF)
            throw std::invalid_argument("encode_dictionary: dims exceed 16 bits");
        for (int i = 15; i >= 0; --i) enc.encode_bit_raw(((w - 1) >> i) & 1);
        for (int i = 15; i >= 0; --i) enc.encode_bit_raw(((h - 1) >> i) & 1);
        std::fill(gen.begin(), gen.end(), BitModel{});
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                const int bit = e.bitmap.at(r, c);
                enc.encode_bit(gen[generic_context(e.bitmap, r, c)], bit);
            }
    }
    return enc.finish();
}

Dictionary decode_dictionary(std::span<const u8> payload, u32 count) {
    Dictionary dict;
    if (count == 0) {
        ArithDecoder dec(payload);  // still validates the 5 flush bytes
        return dict;
    }
    ArithDecoder dec(payload);
    std::vector<BitModel> gen(kContextCount);
    i64 total_pixels = 0;
    for (u32 j = 0; j < count; ++j) {
        u32 wm1 = 0, hm1 = 0;
        for (int i = 15; i >= 0; --i)
            wm1 |= static_cast<u32>(dec.decode_bit_raw()) << i;
        for (int i = 15; i >= 0; --i)
            hm1 |= static_cast<u32>(dec.decode_bit_raw()) << i;
        const int w = static_cast<int>(wm1) + 1, h = static_cast<int>(hm1) + 1;
        if (w > 0xFFFF || h > 0xFFFF)
            throw CodecError(CodecErrorKind::corrupt, "dictionary entry dims overflow");
        total_pixels += static_cast<i64>(w) * h;
        if (total_pixels > kMaxDictPixels)
            throw CodecError(CodecErrorKind::corrupt, "dictionary too large");
        BinaryImage bm(w, h);
        std::fill(gen.begin(), gen.end(), BitModel{});
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                bm.set(r, c, static_cast<u8>(dec.decode_bit(gen[generic_context(bm, r, c)])));
        dict.entries.push_back({static_cast<int>(j), std::move(bm)});
    }
    return dict;
}

// ---------------------------------------------------------------------------
// Full image encode / decode
// ---------------------------------------------------------------------------

std::vector<u8> encode_image(const BinaryImage& x, const Dictionary& dict,
                             const SymbolMapping& mapping,
                             const std::vector<Symbol>& symbols, i64 max_symbol_area,
                             EncodeStats* stats) {
    // The mapping must describe exactly the symbols extracted from x.
    SymbolPartition fresh = partition_symbols(extract_symbols(x), max_symbol_area);
    if (!same_symbol_set(fresh.symbols, symbols))
        throw std::invalid_argument("encode_image: symbol set mismatch");
    if (mapping.assign.size() != symbols.size())
        throw std::invalid_argument("encode_image: mapping size mismatch");
    for (const Assignment& a : mapping.assign)
        if (a.entry < 0 || a.entry >= dict.size())
            throw std::invalid_argument("encode_image: mapping references missing entry");

    const int w = x.width(), h = x.height();
    std::vector<u8> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    put_u32(out, static_cast<u32>(w));
    put_u32(out, static_cast<u32>(h));
    put_u32(out, static_cast<u32>(symbols.size()));
    put_u32(out, static_cast<u32>(dict.size()));

    auto append_segment = [&out](std::vector<u8> seg, u64* size_slot) {
        if (size_slot) *size_slot = seg.size();
        put_u32(out, static_cast<u32>(seg.size()));
        out.insert(out.end(), seg.begin(), seg.end());
    };

    EncodeStats local;
    EncodeStats& st = stats ? *stats : local;
    st = EncodeStats{};
    st.symbols = static_cast<int>(symbols.size());
    st.dict_entries = dict.size();

    append_segment(encode_dictionary(dict), &st.segments.dictionary_bytes);

    // Placements.
    {
        ArithEncoder enc;
        const int n = dict.size();
        const int kbits = n <= 1 ? 0 : std::bit_width(static_cast<u32>(n - 1));
        std::vector<BitModel> id_tree(usize{1} << kbits);
        VarintCtx row_ctx, col_ctx, wd_ctx, hd_ctx, ar_ctx, ac_ctx;
        i64 prev_r = 0, prev_c = 0;
        for (usize i = 0; i < symbols.size(); ++i) {
            const Symbol& s = symbols[i];
            const Assignment& a = mapping.assign[i];
            const BinaryImage& entry = dict.entries[a.entry].bitmap;
            u32 idx = 1;  // tree path; stays below 1<<kbits while coding
            for (int b = kbits - 1; b >= 0; --b) {
                const int bit = (a.entry >> b) & 1;
                enc.encode_bit(id_tree[idx], bit);
                idx = (idx << 1) | static_cast<u32>(bit);
            }
            encode_varint(enc, row_ctx, s.row - prev_r);
            encode_varint(enc, col_ctx, s.col - prev_c);
            encode_varint(enc, wd_ctx, s.width() - entry.width());
            encode_varint(enc, hd_ctx, s.height() - entry.height());
            encode_varint(enc, ar_ctx,
                          a.align.dr - predicted_align(entry.height(), s.height()));
            encode_varint(enc, ac_ctx,
                          a.align.dc - predicted_align(entry.width(), s.width()));
            prev_r = s.row;
            prev_c = s.col;
        }
        append_segment(enc.finish(), &st.segments.placement_bytes);
    }

    // Refinements: every symbol codes its own bitmap over its full box, the
    // bit under its reference context against the mapped entry. This is
    // exactly the computation the offline estimate performs, so estimated
    // and coded sizes track each other.
    BinaryImage canvas(w, h);
    std::vector<u8> in_box(static_cast<usize>(w) * h, 0);
    {
        ArithEncoder enc;
        std::vector<BitModel> ref_ctx(kContextCount);
        for (usize i = 0; i < symbols.size(); ++i) {
            const Symbol& s = symbols[i];
            const Assignment& a = mapping.assign[i];
            const BinaryImage& entry = dict.entries[a.entry].bitmap;
            for (int r = 0; r < s.height(); ++r) {
                for (int c = 0; c < s.width(); ++c) {
                    const u32 ctx = reference_context(s.bitmap, entry, r, c, a.align);
                    const int bit = s.bitmap.at(r, c);
                    enc.encode_bit(ref_ctx[ctx], bit);
                    if (bit) canvas.set(s.row + r, s.col + c, 1);
                    in_box[static_cast<usize>(s.row + r) * w + s.col + c] = 1;
                }
            }
        }
        append_segment(enc.finish(), &st.segments.refinement_bytes);
    }

    // Residual: everything outside the symbol boxes, in raster order. The
    // canvas already holds the symbol union, which equals the image inside
    // the boxes (generic content never reaches into a symbol box).
    {
        ArithEncoder enc;
        std::vector<BitModel> gen(kContextCount);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                if (in_box[static_cast<usize>(r) * w + c]) continue;
                const u32 ctx = generic_context(canvas, r, c);
                const int bit = x.at(r, c);
                enc.encode_bit(gen[ctx], bit);
                canvas.set(r, c, static_cast<u8>(bit));
            }
        }
        append_segment(enc.finish(), &st.segments.residual_bytes);
    }

    st.total_bytes = out.size();
    return out;
}

BinaryImage decode(std::span<const u8> bitstream) {
    usize pos = 0;
    if (bitstream.size() < 5)
        throw CodecError(CodecErrorKind::truncated, "container shorter than header");
    if (std::memcmp(bitstream.data(), kMagic, 4) != 0)
        throw CodecError(CodecErrorKind::bad_magic, "bad magic");
    pos = 4;
    const u8 version = bitstream[pos++];
    if (version != kVersion)
        throw CodecError(CodecErrorKind::bad_version,
                         "unsupported version " + std::to_string(version));

    const u32 w32 = get_u32(bitstream, pos);
    const u32 h32 = get_u32(bitstream, pos);
    const u32 nsym = get_u32(bitstream, pos);
    const u32 ndict = get_u32(bitstream, pos);
    if (w32 == 0 || h32 == 0 || static_cast<i64>(w32) * h32 > kMaxPixels)
        throw CodecError(CodecErrorKind::corrupt, "image dimensions out of range");
    if (nsym > kMaxSymbols || static_cast<i64>(nsym) > static_cast<i64>(w32) * h32)
        throw CodecError(CodecErrorKind::corrupt, "symbol count out of range");
    if (nsym > 0 && ndict == 0)
        throw CodecError(CodecErrorKind::corrupt, "symbols without dictionary");
    if (ndict > nsym)
        throw CodecError(CodecErrorKind::corrupt, "more entries than symbols");
    const int w = static_cast<int>(w32), h = static_cast<int>(h32);

    std::array<std::span<const u8>, 4> segs;
    for (auto& seg : segs) {
        const u32 len = get_u32(bitstream, pos);
        if (pos + len > bitstream.size())
            throw CodecError(CodecErrorKind::segment_mismatch,
                             "segment length exceeds container");
        seg = bitstream.subspan(pos, len);
        pos += len;
    }
    if (pos != bitstream.size())
        throw CodecError(CodecErrorKind::trailing_bytes, "trailing bytes after segments");

    const Dictionary dict = decode_dictionary(segs[0], ndict);

    // Placements.
    std::vector<PlacementRecord> places(nsym);
    if (nsym > 0) {
        ArithDecoder dec(segs[1]);
        const int n = static_cast<int>(ndict);
        const int kbits = n <= 1 ? 0 : std::bit_width(static_cast<u32>(n - 1));
        std::vector<BitModel> id_tree(usize{1} << kbits);
        VarintCtx row_ctx, col_ctx, wd_ctx, hd_ctx, ar_ctx, ac_ctx;
        i64 prev_r = 0, prev_c = 0;
        for (u32 i = 0; i < nsym; ++i) {
            PlacementRecord& p = places[i];
            u32 idx = 1;
            int entry = 0;
            for (int b = 0; b < kbits; ++b) {
                const int bit = dec.decode_bit(id_tree[idx]);
                idx = (idx << 1) | static_cast<u32>(bit);
                entry = (entry << 1) | bit;
            }
            if (entry >= n)
                throw CodecError(CodecErrorKind::corrupt, "entry id out of range");
            p.entry = entry;
            const BinaryImage& ebm = dict.entries[entry].bitmap;
            const i64 row = prev_r + decode_varint(dec, row_ctx);
            const i64 col = prev_c + decode_varint(dec, col_ctx);
            const i64 sw = ebm.width() + decode_varint(dec, wd_ctx);
            const i64 sh = ebm.height() + decode_varint(dec, hd_ctx);
            if (sw < 1 || sh < 1 || sw > w || sh > h)
                throw CodecError(CodecErrorKind::corrupt, "symbol box out of bounds");
            const i64 adr = decode_varint(dec, ar_ctx) +
                            predicted_align(ebm.height(), static_cast<int>(sh));
            const i64 adc = decode_varint(dec, ac_ctx) +
                            predicted_align(ebm.width(), static_cast<int>(sw));
            if (sw < 1 || sh < 1 || row < 0 || col < 0 || row + sh > h || col + sw > w)
                throw CodecError(CodecErrorKind::corrupt, "symbol box out of bounds");
            if (std::abs(adr) > kMaxAlign || std::abs(adc) > kMaxAlign)
                throw CodecError(CodecErrorKind::corrupt, "alignment out of range");
            p.row = static_cast<int>(row);
            p.col = static_cast<int>(col);
            p.width = static_cast<int>(sw);
            p.height = static_cast<int>(sh);
            p.align = Alignment{static_cast<int>(adr), static_cast<int>(adc)};
            prev_r = row;
            prev_c = col;
        }
    }

    BinaryImage canvas(w, h);
    std::vector<u8> in_box(static_cast<usize>(w) * h, 0);

    // Refinements: decode each symbol's bitmap into a local patch (the
    // causal taps read the patch decoded so far), then union onto the page.
    if (nsym > 0) {
        ArithDecoder dec(segs[2]);
        std::vector<BitModel> ref_ctx(kContextCount);
        for (const PlacementRecord& p : places) {
            const BinaryImage& entry = dict.entries[p.entry].bitmap;
            BinaryImage patch(p.width, p.height);
            for (int r = 0; r < p.height; ++r) {
                for (int c = 0; c < p.width; ++c) {
                    const u32 ctx = reference_context(patch, entry, r, c, p.align);
                    patch.set(r, c, static_cast<u8>(dec.decode_bit(ref_ctx[ctx])));
                }
            }
            for (int r = 0; r < p.height; ++r) {
                for (int c = 0; c < p.width; ++c) {
                    if (patch.at(r, c)) canvas.set(p.row + r, p.col + c, 1);
                    in_box[static_cast<usize>(p.row + r) * w + p.col + c] = 1;
                }
            }
        }
    }

    // Residual.
    {
        ArithDecoder dec(segs[3]);
        std::vector<BitModel> gen(kContextCount);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                if (in_box[static_cast<usize>(r) * w + c]) continue;
                const u32 ctx = generic_context(canvas, r, c);
                canvas.set(r, c, static_cast<u8>(dec.decode_bit(gen[ctx])));
            }
        }
    }
    return canvas;
}

// ---------------------------------------------------------------------------
// Mode pipelines
// ---------------------------------------------------------------------------

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::wxor_lossless: return "wxor-lossless";
        case Mode::cee_lossless: return "cee-lossless";
        case Mode::mbir_mrf: return "mbir-mrf";
        case Mode::mbir_dl: return "mbir-dl";
    }
    return "?";
}

Mode mode_from_name(const std::string& name) {
    if (name == "wxor-lossless") return Mode::wxor_lossless;
    if (name == "cee-lossless") return Mode::cee_lossless;
    if (name == "mbir-mrf") return Mode::mbir_mrf;
    if (name == "mbir-dl") return Mode::mbir_dl;
    throw std::invalid_argument("unknown mode: " + name);
}

double adaptive_refinement_estimate_bits(const std::vector<Symbol>& symbols,
                                         const Dictionary& dict,
                                         const SymbolMapping& mapping) {
    std::vector<BitModel> ctx(kContextCount);
    double bits = 0.0;
    for (usize i = 0; i < symbols.size(); ++i) {
        const Symbol& s = symbols[i];
        const Assignment& a = mapping.assign[i];
        const BinaryImage& entry = dict.entries[a.entry].bitmap;
        for (int r = 0; r < s.height(); ++r) {
            for (int c = 0; c < s.width(); ++c) {
                const u32 cx = reference_context(s.bitmap, entry, r, c, a.align);
                const int bit = s.bitmap.at(r, c);
                bits += ctx[cx].cost_bits(bit);
                ctx[cx].update(bit);
            }
        }
    }
    return bits;
}

double refinement_estimate_bits(const std::vector<Symbol>& symbols,
                                const Dictionary& dict, const SymbolMapping& mapping) {
    if (symbols.empty()) return 0.0;
    const ContextCounts counts = accumulate_counts(symbols, dict, mapping);
    const ContextModel phi = estimate_phi(counts);
    const CeeTables tables(phi);
    double nats = 0.0;
    for (usize i = 0; i < symbols.size(); ++i) {
        const Assignment& a = mapping.assign[i];
        nats += cee_nats(symbols[i], dict.entries[a.entry].bitmap, a.align, tables);
    }
    return nats / std::numbers::ln2;
}

CompressResult compress(const BinaryImage& y, const CompressConfig& config) {
    const RestorationConfig& rc = config.restoration;
    CompressResult res;
    res.report.mode = config.mode;

    BinaryImage image;              // what gets encoded
    std::vector<Symbol> symbols;
    Dictionary dict;
    SymbolMapping mapping;

    switch (config.mode) {
        case Mode::wxor_lossless: {
            image = y;
            SymbolPartition part =
                partition_symbols(extract_symbols(image), rc.oversize_threshold);
            symbols = std::move(part.symbols);
            ClusterResult cr = build_dictionary_wxor(symbols, rc.wxor, rc.cluster);
            dict = std::move(cr.dict);
            mapping = std::move(cr.mapping);
            break;
        }
        case Mode::cee_lossless: {
            image = y;
            SymbolPartition part =
                partition_symbols(extract_symbols(image), rc.oversize_threshold);
            symbols = std::move(part.symbols);
            if (!symbols.empty()) {
                CeeDictionary learned = learn_cee_dictionary(
                    symbols, rc.wxor, rc.cluster, rc.beta_a, rc.beta_b);
                dict = std::move(learned.dict);
                mapping = std::move(learned.mapping);
            }
            break;
        }
        case Mode::mbir_mrf:
        case Mode::mbir_dl: {
            RestorationConfig r2 = rc;
            r2.prior = config.mode == Mode::mbir_mrf ? PriorKind::mrf
                                                     : PriorKind::dictionary;
            RestorationState state = restore(y, r2);
            res.report.trace = std::move(state.trace);
            res.report.max_cache_drift = state.max_cache_drift;
            res.report.restored_error_vs_input = error_count(state.x, y).count;
            image = std::move(state.x);
            symbols = std::move(state.symbols);
            dict = std::move(state.dict);
            mapping = std::move(state.mapping);
            break;
        }
    }

    if (!symbols.empty()) prune_unused_entries(dict, mapping);
    res.report.refine_estimate_bits =
        adaptive_refinement_estimate_bits(symbols, dict, mapping);
    res.report.refine_map_estimate_bits = refinement_estimate_bits(symbols, dict, mapping);
    res.bitstream =
        encode_image(image, dict, mapping, symbols, rc.oversize_threshold,
                     &res.report.stats);
    res.report.symbols = static_cast<int>(symbols.size());
    res.report.dict_entries = dict.size();
    res.report.raw_bytes =
        (static_cast<u64>(image.width()) * static_cast<u64>(image.height()) + 7) / 8;
    res.report.ratio = (static_cast<double>(image.width()) * image.height() / 8.0) /
                       static_cast<double>(res.bitstream.size());
    res.encoded_image = std::move(image);
    return res;
}

} // namespace mbdl
