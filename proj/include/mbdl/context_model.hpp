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

#ifndef MBDL_CONTEXT_MODEL_HPP
#define MBDL_CONTEXT_MODEL_HPP

#include <array>
#include <filesystem>
#include <vector>

#include "mbdl/binary_image.hpp"
#include "mbdl/symbols.hpp"

namespace mbdl {

inline constexpr int kContextBits = 10;
inline constexpr int kContextCount = 1 << kContextBits;  // 1024 parameters

/// The frozen 10-pixel reference template. A symbol pixel at r is predicted
/// from 4 causal neighbors in the symbol bitmap and 6 neighbors of the
/// aligned pixel in the dictionary entry. Encoder, decoder and learner all
/// use this one constant; out-of-bounds neighbors read as background.
///
/// Bit layout of the packed context value (bit 9 = MSB):
///   bit 9: symbol W   (0,-1)     bit 5: entry center (0, 0)
///   bit 8: symbol NW  (-1,-1)    bit 4: entry W      (0,-1)
///   bit 7: symbol N   (-1, 0)    bit 3: entry E      (0,+1)
///   bit 6: symbol NE  (-1,+1)    bit 2: entry N      (-1, 0)
///                                bit 1: entry S      (+1, 0)
///                                bit 0: entry NW     (-1,-1)
/// Entry offsets are relative to the aligned position r + alignment.
struct RefTemplate {
    static constexpr std::array<std::array<int, 2>, 4> symbol_taps{
        {{0, -1}, {-1, -1}, {-1, 0}, {-1, 1}}};
    static constexpr std::array<std::array<int, 2>, 6> entry_taps{
        {{0, 0}, {0, -1}, {0, 1}, {-1, 0}, {1, 0}, {-1, -1}}};
};

/// The causal-only template used for coding bitmaps without a reference
/// (dictionary entries and the residual region): 10 previously scanned
/// pixels, two rows up and to the left. Bit 9 = first tap below.
struct GenericTemplate {
    static constexpr std::array<std::array<int, 2>, 10> taps{
        {{0, -1}, {0, -2}, {-1, -2}, {-1, -1}, {-1, 0}, {-1, 1}, {-1, 2},
         {-2, -1}, {-2, 0}, {-2, 1}}};
};

/// Integer offset added to symbol coordinates to get entry coordinates.
struct Alignment {
    int dr = 0;
    int dc = 0;
    bool operator==(const Alignment&) const = default;
};

/// Centroid registration: offset = round(centroid(entry) - centroid(symbol)),
/// computed in exact integer arithmetic, halves rounding toward the top-left.
/// Empty bitmaps use their box center.
Alignment centroid_alignment(const Symbol& sym, const BinaryImage& entry);

/// Packs the 10 template reads for symbol position (r, c).
u32 reference_context(const BinaryImage& sym_bitmap, const BinaryImage& entry,
                      int r, int c, Alignment align);

/// Packs the 10 causal reads for position (r, c) of a lone bitmap.
u32 generic_context(const BinaryImage& bitmap, int r, int c);

/// Per-context counts of observed 0s and 1s; the sufficient statistics for
/// the phi estimate. Partial counts merge by addition.
struct ContextCounts {
    std::array<u64, kContextCount> n0{};
    std::array<u64, kContextCount> n1{};

    u64 total() const {
        u64 t = 0;
        for (int c = 0; c < kContextCount; ++c) t += n0[c] + n1[c];
        return t;
    }
    ContextCounts& operator+=(const ContextCounts& other) {
        for (int c = 0; c < kContextCount; ++c) {
            n0[c] += other.n0[c];
            n1[c] += other.n1[c];
        }
        return *this;
    }
};

struct Dictionary;       // dictionary.hpp
struct SymbolMapping;    // dictionary.hpp

/// Scans every symbol patch in raster order and counts pixel values per
/// reference context against the mapped entry.
ContextCounts accumulate_counts(const std::vector<Symbol>& symbols,
                                const Dictionary& dict,
                                const SymbolMapping& mapping);

/// The Bernoulli parameter vector. phi[c] is the probability of pixel value
/// ZERO given context c; the Beta(a,b) MAP form keeps every entry strictly
/// inside (0,1). Immutable after estimation.
struct ContextModel {
    std::array<double, kContextCount> phi;
    double hyper_a = 2.0;
    double hyper_b = 2.0;

    static ContextModel uniform();
};

/// MAP estimate phi_c = (n0 + a - 1) / (n0 + n1 + a + b - 2); requires
/// a > 1 and b > 1 so the maximizer is interior.
ContextModel estimate_phi(const ContextCounts& counts, double a = 2.0, double b = 2.0);

/// Precomputed -ln(phi) / -ln(1-phi) lookups; what the restoration sweep and
/// scoring loops actually touch.
struct CeeTables {
    std::array<double, kContextCount> nll0;  // -ln p(pixel=0 | c), nats
    std::array<double, kContextCount> nll1;

    explicit CeeTables(const ContextModel& model);

    double pixel_nats(u32 ctx, u8 value) const {
        return value ? nll1[ctx] : nll0[ctx];
    }
};

/// -log p(symbol | entry; phi), summed over every patch position.
double cee_nats(const Symbol& sym, const BinaryImage& entry, Alignment align,
                const CeeTables& tables);

/// Same sum, abandoned as soon as it exceeds bail_above (every term is
/// positive, so anything returned above the bound is certainly worse).
double cee_nats_bounded(const Symbol& sym, const BinaryImage& entry, Alignment align,
                        const CeeTables& tables, double bail_above);

/// Same in bits (the unit the codec and the dictionary penalty use).
double cee_bits(const Symbol& sym, const BinaryImage& entry, Alignment align,
                const ContextModel& model);

/// -sum log Beta-prior terms (the variable part, nats); the phi regularizer
/// that the MAP estimate minimizes jointly with the context code length.
double phi_regularizer_nats(const ContextModel& model);

struct WxorConfig {
    bool unit_weights = false;  ///< true reproduces plain XOR
    bool normalized = true;     ///< divide by compared-extent area
    double tau = 0.12;          ///< merge threshold for WXOR clustering
};

/// Weighted Hamming distance between a symbol and an aligned entry. A
/// mismatch weighs 1 + (mismatches among its 8 neighbors), so clustered
/// errors dominate scattered ones.
double wxor_dissimilarity(const Symbol& sym, const BinaryImage& entry,
                          Alignment align, const WxorConfig& cfg = {});

/// Debug serialization of phi (versioned binary blob, packed-integer context
/// order). Not part of the compressed bitstream.
void save_context_model(const ContextModel& model, const std::filesystem::path& path);
ContextModel load_context_model(const std::filesystem::path& path);

} // namespace mbdl

#endif // MBDL_CONTEXT_MODEL_HPP
