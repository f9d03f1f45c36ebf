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

#include "mbdl/context_model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "mbdl/dictionary.hpp"

namespace mbdl {

namespace {

// round(p/q) with halves toward -infinity; q > 0.
i64 round_half_down(i64 p, i64 q) {
    i64 num = 2 * p + q - 1;
    i64 den = 2 * q;
    i64 quo = num / den;
    if ((num % den != 0) && ((num < 0) != (den < 0))) --quo;
    return quo;
}

// Exact centroid as a rational (sum / count); empty bitmaps fall back to the
// box center so alignment stays defined for all-background patches.
struct RationalPoint {
    i64 r_num, c_num, den;
};

RationalPoint bitmap_centroid(const BinaryImage& bm, i64 fg, i64 r_sum, i64 c_sum) {
    if (fg > 0) return {r_sum, c_sum, fg};
    return {bm.height() - 1, bm.width() - 1, 2};
}

} // namespace

Alignment centroid_alignment(const Symbol& sym, const BinaryImage& entry) {
    i64 e_fg = 0, e_rs = 0, e_cs = 0;
    for (int r = 0; r < entry.height(); ++r)
        for (int c = 0; c < entry.width(); ++c)
            if (entry.at(r, c)) {
                ++e_fg;
                e_rs += r;
                e_cs += c;
            }
    const RationalPoint ps =
        bitmap_centroid(sym.bitmap, sym.fg_count, sym.centroid_r_sum, sym.centroid_c_sum);
    const RationalPoint pe = bitmap_centroid(entry, e_fg, e_rs, e_cs);
    // offset = centroid(entry) - centroid(symbol), one exact rational per axis
    const i64 den = ps.den * pe.den;
    return Alignment{
        static_cast<int>(round_half_down(pe.r_num * ps.den - ps.r_num * pe.den, den)),
        static_cast<int>(round_half_down(pe.c_num * ps.den - ps.c_num * pe.den, den))};
}

u32 reference_context(const BinaryImage& sym_bitmap, const BinaryImage& entry,
                      int r, int c, Alignment align) {
    if (!sym_bitmap.in_bounds(r, c))
        throw std::invalid_argument("reference_context: position out of bounds");
    u32 ctx = 0;
    for (const auto& tap : RefTemplate::symbol_taps)
        ctx = (ctx << 1) | sym_bitmap.at_or_bg(r + tap[0], c + tap[1]);
    const int er = r + align.dr, ec = c + align.dc;
    for (const auto& tap : RefTemplate::entry_taps)
        ctx = (ctx << 1) | entry.at_or_bg(er + tap[0], ec + tap[1]);
    return ctx;
}

u32 generic_context(const BinaryImage& bitmap, int r, int c) {
    u32 ctx = 0;
    for (const auto& tap : GenericTemplate::taps)
        ctx = (ctx << 1) | bitmap.at_or_bg(r + tap[0], c + tap[1]);
    return ctx;
}

ContextCounts accumulate_counts(const std::vector<Symbol>& symbols,
                                const Dictionary& dict,
                                const SymbolMapping& mapping) {
    if (mapping.assign.size() != symbols.size())
        throw std::invalid_argument("accumulate_counts: unmapped symbol");
    ContextCounts counts;
    for (usize i = 0; i < symbols.size(); ++i) {
        const Symbol& s = symbols[i];
        const Assignment& a = mapping.assign[i];
        const BinaryImage& entry = dict.entries.at(a.entry).bitmap;
        for (int r = 0; r < s.height(); ++r) {
            for (int c = 0; c < s.width(); ++c) {
                const u32 ctx = reference_context(s.bitmap, entry, r, c, a.align);
                if (s.bitmap.at(r, c))
                    ++counts.n1[ctx];
                else
                    ++counts.n0[ctx];
            }
        }
    }
    return counts;
}

ContextModel ContextModel::uniform() {
    ContextModel m;
    m.phi.fill(0.5);
    return m;
}

ContextModel estimate_phi(const ContextCounts& counts, double a, double b) {
    if (!(a > 1.0) || !(b > 1.0))
        throw std::invalid_argument("estimate_phi: requires a > 1 and b > 1");
    ContextModel m;
    m.hyper_a = a;
    m.hyper_b = b;
    for (int c = 0; c < kContextCount; ++c) {
        const double n0 = static_cast<double>(counts.n0[c]);
        const double n1 = static_cast<double>(counts.n1[c]);
        m.phi[c] = (n0 + a - 1.0) / (n0 + n1 + a + b - 2.0);
    }
    return m;
}

CeeTables::CeeTables(const ContextModel& model) {
    for (int c = 0; c < kContextCount; ++c) {
        nll0[c] = -std::log(model.phi[c]);
        nll1[c] = -std::log(1.0 - model.phi[c]);
    }
}

double cee_nats(const Symbol& sym, const BinaryImage& entry, Alignment align,
                const CeeTables& tables) {
    double total = 0.0;
    for (int r = 0; r < sym.height(); ++r)
        for (int c = 0; c < sym.width(); ++c)
            total += tables.pixel_nats(
                reference_context(sym.bitmap, entry, r, c, align), sym.bitmap.at(r, c));
    return total;
}

double cee_nats_bounded(const Symbol& sym, const BinaryImage& entry, Alignment align,
                        const CeeTables& tables, double bail_above) {
    double total = 0.0;
    for (int r = 0; r < sym.height(); ++r) {
        for (int c = 0; c < sym.width(); ++c)
            total += tables.pixel_nats(
                reference_context(sym.bitmap, entry, r, c, align), sym.bitmap.at(r, c));
        if (total > bail_above) return total;
    }
    return total;
}

double cee_bits(const Symbol& sym, const BinaryImage& entry, Alignment align,
                const ContextModel& model) {
    return cee_nats(sym, entry, align, CeeTables(model)) / std::numbers::ln2;
}

double phi_regularizer_nats(const ContextModel& model) {
    double total = 0.0;
    for (int c = 0; c < kContextCount; ++c)
        total += -std::log(model.phi[c] * (1.0 - model.phi[c]));
    return total;
}

double wxor_dissimilarity(const Symbol& sym, const BinaryImage& entry,
                          Alignment align, const WxorConfig& cfg) {
    // Mismatch plane over the union extent of the two aligned boxes, in
    // symbol coordinates. Reads outside either bitmap are background.
    const int r0 = std::min(0, -align.dr);
    const int c0 = std::min(0, -align.dc);
    const int r1 = std::max(sym.height(), entry.height() - align.dr);
    const int c1 = std::max(sym.width(), entry.width() - align.dc);
    const int mh = r1 - r0, mw = c1 - c0;

    BinaryImage mism(mw, mh);
    bool any = false;
    for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
            const u8 sv = sym.bitmap.at_or_bg(r, c);
            const u8 ev = entry.at_or_bg(r + align.dr, c + align.dc);
            if (sv != ev) {
                mism.set(r - r0, c - c0, 1);
                any = true;
            }
        }
    }

    double total = 0.0;
    if (any) {
        for (int r = 0; r < mh; ++r) {
            for (int c = 0; c < mw; ++c) {
                if (!mism.at(r, c)) continue;
                if (cfg.unit_weights) {
                    total += 1.0;
                    continue;
                }
                int neigh = 0;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc)
                        if (dr || dc) neigh += mism.at_or_bg(r + dr, c + dc);
                total += 1.0 + neigh;
            }
        }
    }
    if (cfg.normalized) total /= static_cast<double>(mh) * mw;
    return total;
}

namespace {
constexpr char kPhiMagic[4] = {'M', 'B', 'P', 'H'};
constexpr u8 kPhiVersion = 1;
} // namespace

void save_context_model(const ContextModel& model, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(kPhiMagic, 4);
    f.put(static_cast<char>(kPhiVersion));
    auto put_double = [&f](double v) {
        f.write(reinterpret_cast<const char*>(&v), sizeof v);
    };
    put_double(model.hyper_a);
    put_double(model.hyper_b);
    for (double p : model.phi) put_double(p);
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

ContextModel load_context_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kPhiMagic, 4) != 0)
        throw std::runtime_error("bad context-model magic");
    const int version = f.get();
    if (version != kPhiVersion)
        throw std::runtime_error("unsupported context-model version");
    ContextModel m;
    auto get_double = [&f]() {
        double v;
        f.read(reinterpret_cast<char*>(&v), sizeof v);
        return v;
    };
    m.hyper_a = get_double();
    m.hyper_b = get_double();
    for (double& p : m.phi) p = get_double();
    if (!f) throw std::runtime_error("truncated context-model blob");
    return m;
}

} // namespace mbdl
