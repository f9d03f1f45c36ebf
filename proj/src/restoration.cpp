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

#include "mbdl/restoration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <unordered_map>

namespace mbdl {

namespace {

// Positions whose causal taps include the flipped pixel.
constexpr int kCausalDependents[4][2] = {{0, 1}, {1, -1}, {1, 0}, {1, 1}};

u32 ref_ctx_override(const BinaryImage& bm, const BinaryImage& entry, int r, int c,
                     Alignment align, int orow, int ocol, u8 oval) {
    u32 ctx = 0;
    for (const auto& tap : RefTemplate::symbol_taps) {
        const int tr = r + tap[0], tc = c + tap[1];
        const u8 v = (tr == orow && tc == ocol) ? oval : bm.at_or_bg(tr, tc);
        ctx = (ctx << 1) | v;
    }
    const int er = r + align.dr, ec = c + align.dc;
    for (const auto& tap : RefTemplate::entry_taps)
        ctx = (ctx << 1) | entry.at_or_bg(er + tap[0], ec + tap[1]);
    return ctx;
}

double mrf_energy(const BinaryImage& x) {
    // Each unordered 8-neighbor clique counted once via 4 forward directions.
    constexpr int dirs[4][2] = {{0, 1}, {1, -1}, {1, 0}, {1, 1}};
    double e = 0.0;
    for (int r = 0; r < x.height(); ++r)
        for (int c = 0; c < x.width(); ++c)
            for (const auto& d : dirs) {
                const int rr = r + d[0], cc = c + d[1];
                if (x.in_bounds(rr, cc) && x.at(r, c) != x.at(rr, cc)) e += 1.0;
            }
    return e;
}

double total_cee_nats(const std::vector<Symbol>& symbols, const Dictionary& dict,
                      const SymbolMapping& mapping, const CeeTables& tables) {
    double total = 0.0;
    for (usize i = 0; i < symbols.size(); ++i) {
        const Assignment& a = mapping.assign[i];
        total += cee_nats(symbols[i], dict.entries[a.entry].bitmap, a.align, tables);
    }
    return total;
}

double dict_cost_nats(const Dictionary& dict) {
    double bits = 0.0;
    for (const DictionaryEntry& e : dict.entries) bits += entry_cost_bits(e.bitmap);
    return bits * std::numbers::ln2;
}

// Reassignment sweep; identical bitmaps share one select_entry evaluation.
SymbolMapping reassign_all(const std::vector<Symbol>& symbols, const Dictionary& dict,
                           const CeeTables& tables) {
    auto hash_bitmap = [](const BinaryImage& bm) {
        u64 h = mix64(static_cast<u64>(bm.width()), static_cast<u64>(bm.height()));
        for (u8 v : bm.pixels()) h = mix64(h ^ v);
        return h;
    };
    SymbolMapping m;
    m.assign.resize(symbols.size());
    std::unordered_map<u64, std::vector<usize>> seen;
    for (usize i = 0; i < symbols.size(); ++i) {
        usize same = i;
        for (usize j : seen[hash_bitmap(symbols[i].bitmap)])
            if (symbols[j].bitmap == symbols[i].bitmap) {
                same = j;
                break;
            }
        if (same != i) {
            m.assign[i] = m.assign[same];
        } else {
            m.assign[i] = select_entry(symbols[i], dict, tables);
            seen[hash_bitmap(symbols[i].bitmap)].push_back(i);
        }
    }
    return m;
}

} // namespace

double delta_prior_mrf(const BinaryImage& x, int row, int col, double beta) {
    if (!x.in_bounds(row, col))
        throw std::invalid_argument("delta_prior_mrf: pixel out of bounds");
    const u8 v = x.at(row, col);
    int agree = 0, disagree = 0;
    for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
            if (!dr && !dc) continue;
            const int rr = row + dr, cc = col + dc;
            if (!x.in_bounds(rr, cc)) continue;
            if (x.at(rr, cc) == v)
                ++agree;
            else
                ++disagree;
        }
    return beta * static_cast<double>(agree - disagree);
}

// ---------------------------------------------------------------------------
// SweepWorkspace
// ---------------------------------------------------------------------------

SweepWorkspace::SweepWorkspace(const BinaryImage& y, BinaryImage x,
                               std::vector<Symbol> symbols, Dictionary dict,
                               SymbolMapping mapping, const ContextModel& phi,
                               const RestorationConfig& config)
    : y_(y),
      x_(std::move(x)),
      filter_(build_filter(config.sigma2, config.filter_size)),
      mu_(apply_filter(x_, filter_)),
      symbols_(std::move(symbols)),
      dict_(std::move(dict)),
      mapping_(std::move(mapping)),
      tables_(phi),
      config_(config),
      owner_(static_cast<usize>(x_.width()) * x_.height(), -1),
      sweep_mask_(static_cast<usize>(x_.width()) * x_.height(), 0) {
    const int w = x_.width(), h = x_.height();
    auto idx = [w](int r, int c) { return static_cast<usize>(r) * w + c; };

    // Foreground ownership is definitive: symbol foregrounds are disjoint.
    for (const Symbol& s : symbols_)
        for (int r = 0; r < s.height(); ++r)
            for (int c = 0; c < s.width(); ++c)
                if (s.bitmap.at(r, c)) owner_[idx(s.row + r, s.col + c)] = s.id;

    // Background pixels inside one or more boxes: the covering symbol with
    // the nearest foreground pixel, ties to the lower id.
    std::vector<std::vector<i32>> covers(owner_.size());
    for (const Symbol& s : symbols_)
        for (int r = 0; r < s.height(); ++r)
            for (int c = 0; c < s.width(); ++c)
                if (!s.bitmap.at(r, c)) covers[idx(s.row + r, s.col + c)].push_back(s.id);
    for (usize p = 0; p < covers.size(); ++p) {
        if (owner_[p] >= 0 || covers[p].empty()) continue;
        if (covers[p].size() == 1) {
            owner_[p] = covers[p][0];
            continue;
        }
        const int pr = static_cast<int>(p) / w, pc = static_cast<int>(p) % w;
        i64 best_d = std::numeric_limits<i64>::max();
        i32 best_id = -1;
        for (i32 sid : covers[p]) {
            const Symbol& s = symbols_[sid];
            i64 dmin = std::numeric_limits<i64>::max();
            for (int r = 0; r < s.height(); ++r)
                for (int c = 0; c < s.width(); ++c) {
                    if (!s.bitmap.at(r, c)) continue;
                    const i64 dr = s.row + r - pr, dc = s.col + c - pc;
                    dmin = std::min(dmin, dr * dr + dc * dc);
                }
            if (dmin < best_d) {
                best_d = dmin;
                best_id = sid;
            }
        }
        owner_[p] = best_id;
    }

    // Sweep domain: symbol boxes dilated by the filter radius.
    const int rad = filter_.radius();
    for (const Symbol& s : symbols_) {
        const int r0 = std::max(0, s.row - rad), r1 = std::min(h, s.row + s.height() + rad);
        const int c0 = std::max(0, s.col - rad), c1 = std::min(w, s.col + s.width() + rad);
        for (int r = r0; r < r1; ++r)
            for (int c = c0; c < c1; ++c) sweep_mask_[idx(r, c)] = 1;
    }

    likelihood_nats_ = recompute_likelihood_nats();
    if (config_.prior == PriorKind::dictionary)
        cee_nats_total_ = recompute_cee_nats();
    else
        mrf_energy_nats_ = config_.mrf_beta * mrf_energy(x_);
}

i64 SweepWorkspace::owner_of(int row, int col) const {
    return owner_[static_cast<usize>(row) * x_.width() + col];
}

double SweepWorkspace::patch_term_nats(const Symbol& s, const Assignment& a, int r,
                                       int c) const {
    const u32 ctx =
        reference_context(s.bitmap, dict_.entries[a.entry].bitmap, r, c, a.align);
    return tables_.pixel_nats(ctx, s.bitmap.at(r, c));
}

double SweepWorkspace::delta_prior_dl(int row, int col) const {
    const i64 own = owner_of(row, col);
    if (own < 0) return 0.0;  // prior-neutral outside every symbol
    const Symbol& s = symbols_[own];
    const Assignment& a = mapping_.assign[own];
    const BinaryImage& entry = dict_.entries[a.entry].bitmap;
    const int r = row - s.row, c = col - s.col;
    const u8 v = s.bitmap.at(r, c);
    const u8 nv = v ^ 1;

    // Own term: the causal taps exclude the pixel itself, so only the coded
    // value changes.
    const u32 ctx = reference_context(s.bitmap, entry, r, c, a.align);
    double delta = tables_.pixel_nats(ctx, nv) - tables_.pixel_nats(ctx, v);

    // Causal dependents: their context gains the flipped value.
    for (const auto& d : kCausalDependents) {
        const int rr = r + d[0], cc = c + d[1];
        if (!s.bitmap.in_bounds(rr, cc)) continue;
        const u8 dv = s.bitmap.at(rr, cc);
        const u32 oldc = reference_context(s.bitmap, entry, rr, cc, a.align);
        const u32 newc = ref_ctx_override(s.bitmap, entry, rr, cc, a.align, r, c, nv);
        delta += tables_.pixel_nats(newc, dv) - tables_.pixel_nats(oldc, dv);
    }
    return delta;
}

double SweepWorkspace::delta_likelihood(int row, int col) const {
    return delta_likelihood_cached(y_, x_, mu_, filter_, row, col);
}

double SweepWorkspace::delta_prior_nats(int row, int col) const {
    if (config_.prior == PriorKind::dictionary) return delta_prior_dl(row, col);
    return delta_prior_mrf(x_, row, col, config_.mrf_beta);
}

bool SweepWorkspace::pixel_update(int row, int col) {
    const double d1 = delta_likelihood(row, col);
    const double d2 = delta_prior_nats(row, col);
    if (!(d1 + d2 < 0.0)) return false;  // ties keep the current value

    const u8 nv = x_.at(row, col) ^ 1;
    x_.set(row, col, nv);
    update_mu_for_flip(mu_, filter_, row, col, nv);
    likelihood_nats_ += d1;
    if (config_.prior == PriorKind::dictionary) {
        cee_nats_total_ += d2;
        const i64 own = owner_of(row, col);
        if (own >= 0) {
            Symbol& s = symbols_[own];
            const int r = row - s.row, c = col - s.col;
            s.bitmap.set(r, c, nv);
            if (nv) {
                ++s.fg_count;
                s.centroid_r_sum += r;
                s.centroid_c_sum += c;
            } else {
                --s.fg_count;
                s.centroid_r_sum -= r;
                s.centroid_c_sum -= c;
            }
        }
    } else {
        mrf_energy_nats_ += d2;
    }
    return true;
}

i64 SweepWorkspace::sweep() {
    i64 flips = 0;
    const int w = x_.width(), h = x_.height();
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (sweep_mask_[static_cast<usize>(r) * w + c] && pixel_update(r, c))
                ++flips;
    return flips;
}

double SweepWorkspace::recompute_likelihood_nats() const {
    return neg_log_likelihood(y_, x_, filter_);
}

double SweepWorkspace::recompute_cee_nats() const {
    return total_cee_nats(symbols_, dict_, mapping_, tables_);
}

std::vector<Symbol> SweepWorkspace::release_symbols() { return std::move(symbols_); }
BinaryImage SweepWorkspace::release_x() { return std::move(x_); }
Dictionary SweepWorkspace::release_dict() { return std::move(dict_); }
SymbolMapping SweepWorkspace::release_mapping() { return std::move(mapping_); }

// ---------------------------------------------------------------------------
// The outer loop
// ---------------------------------------------------------------------------

namespace {

struct CostParts {
    double likelihood = 0.0;
    double prior = 0.0;
    double total() const { return likelihood + prior; }
};

} // namespace

RestorationState restore(const BinaryImage& y, const RestorationConfig& config) {
    RestorationState state;
    state.x = y;
    const LowPassFilter filter = build_filter(config.sigma2, config.filter_size);

    auto extract = [&](const BinaryImage& img) {
        return partition_symbols(extract_symbols(img), config.oversize_threshold);
    };
    SymbolPartition part = extract(state.x);

    const bool mrf = config.prior == PriorKind::mrf;
    int epoch = 0;

    auto push_row = [&](int iteration, const char* phase, const CostParts& costs,
                        i64 flips) {
        state.trace.push_back(TraceRow{iteration, phase, costs.likelihood, costs.prior,
                                       costs.total(), flips, epoch});
    };

    if (part.symbols.empty()) {
        // Degenerate page: nothing to learn from, nothing to sweep.
        CostParts costs{neg_log_likelihood(y, state.x, filter),
                        mrf ? config.mrf_beta * mrf_energy(state.x) : 0.0};
        push_row(0, "init", costs, 0);
        state.symbols = std::move(part.symbols);
        state.generic = std::move(part.generic);
        state.likelihood_nats = costs.likelihood;
        state.total_nats = costs.total();
        return state;
    }

    ClusterResult current = mrf ? ClusterResult{}
                                : build_dictionary_wxor(part.symbols, config.wxor,
                                                        config.cluster);
    state.phi = ContextModel::uniform();

    auto eval_costs = [&](const std::vector<Symbol>& symbols) {
        CostParts costs;
        costs.likelihood = neg_log_likelihood(y, state.x, filter);
        if (mrf) {
            costs.prior = config.mrf_beta * mrf_energy(state.x);
        } else {
            const CeeTables tables(state.phi);
            costs.prior = total_cee_nats(symbols, current.dict, current.mapping, tables) +
                          dict_cost_nats(current.dict) + phi_regularizer_nats(state.phi);
        }
        return costs;
    };

    CostParts costs = eval_costs(part.symbols);
    push_row(0, "init", costs, 0);
    double prev_total = costs.total();

    for (int outer = 1; outer <= config.max_outer; ++outer) {
        state.iterations = outer;
        bool resegmented = false;

        if (outer > 1) {
            SymbolPartition fresh = extract(state.x);
            if (!same_symbol_set(fresh.symbols, part.symbols)) {
                resegmented = true;
                ++epoch;
                part = std::move(fresh);
                if (!mrf) {
                    // Prior sum re-bases on the new segmentation; map the new
                    // symbols onto the existing dictionary before re-learning.
                    const CeeTables tables(state.phi);
                    current.mapping = reassign_all(part.symbols, current.dict, tables);
                }
                costs = eval_costs(part.symbols);
                push_row(outer, "resegment", costs, 0);
                prev_total = costs.total();
            } else {
                part = std::move(fresh);
            }
        }

        bool dict_kept = true;
        if (!mrf) {
            // Parameter estimation: the exact block minimizer of the context
            // code length plus the Beta regularizer.
            const ContextCounts counts =
                accumulate_counts(part.symbols, current.dict, current.mapping);
            state.phi = estimate_phi(counts, config.beta_a, config.beta_b);
            costs = eval_costs(part.symbols);
            push_row(outer, "phi", costs, 0);

            // Dictionary construction: take the greedy re-clustering only if
            // it beats the kept dictionary after a reassignment sweep.
            const CeeTables tables(state.phi);
            ClusterResult cand = cluster_symbols(part.symbols, state.phi, config.cluster);
            SymbolMapping kept_mapping = reassign_all(part.symbols, current.dict, tables);
            const double kept_obj =
                total_cee_nats(part.symbols, current.dict, kept_mapping, tables) +
                dict_cost_nats(current.dict);
            const double cand_obj = cand.objective_bits * std::numbers::ln2;
            if (cand_obj < kept_obj) {
                current.dict = std::move(cand.dict);
                current.mapping = std::move(cand.mapping);
                dict_kept = false;
            } else {
                current.mapping = std::move(kept_mapping);
            }
            costs = eval_costs(part.symbols);
            push_row(outer, "dict", costs, 0);
        }

        // Image restoration: raster sweeps of single-pixel updates.
        SweepWorkspace ws(y, std::move(state.x), std::move(part.symbols),
                          std::move(current.dict), std::move(current.mapping),
                          state.phi, config);
        i64 total_flips = 0;
        const double fixed_parts =
            mrf ? 0.0
                : dict_cost_nats(ws.dict()) + phi_regularizer_nats(state.phi);
        for (int inner = 1; inner <= config.max_inner; ++inner) {
            const i64 flips = ws.sweep();
            total_flips += flips;
            CostParts c2{ws.likelihood_nats(),
                         mrf ? ws.mrf_nats() : ws.cee_nats_total() + fixed_parts};
            push_row(outer, "sweep", c2, flips);
            if (flips == 0) break;
        }

        // Boundary audit: incremental bookkeeping versus full recomputation.
        const double like_full = ws.recompute_likelihood_nats();
        double prior_full;
        if (mrf) {
            prior_full = config.mrf_beta * mrf_energy(ws.x());
        } else {
            prior_full = ws.recompute_cee_nats() + fixed_parts;
        }
        const double like_drift = std::abs(ws.likelihood_nats() - like_full) /
                                  std::max(1.0, std::abs(like_full));
        const double prior_cached = mrf ? ws.mrf_nats() : ws.cee_nats_total() + fixed_parts;
        const double prior_drift =
            std::abs(prior_cached - prior_full) / std::max(1.0, std::abs(prior_full));
        state.max_cache_drift = std::max({state.max_cache_drift, like_drift, prior_drift});

        current.dict = ws.release_dict();
        current.mapping = ws.release_mapping();
        part.symbols = ws.release_symbols();
        state.x = ws.release_x();

        const double total = like_full + prior_full;
        const double rel = std::abs(total - prev_total) / std::max(1.0, std::abs(prev_total));
        const bool fixed_point = total_flips == 0 && dict_kept && !resegmented;
        prev_total = total;
        if (fixed_point || rel < config.conv_threshold) break;
    }

    // Final packaging: a mapping consistent with the symbols of the final x.
    SymbolPartition final_part = extract(state.x);
    state.generic = std::move(final_part.generic);
    if (mrf) {
        // Encoding uses a CEE dictionary learned on the restored image.
        state.symbols = std::move(final_part.symbols);
        if (!state.symbols.empty()) {
            CeeDictionary learned = learn_cee_dictionary(
                state.symbols, config.wxor, config.cluster, config.beta_a, config.beta_b);
            state.phi = std::move(learned.phi);
            current.dict = std::move(learned.dict);
            current.mapping = std::move(learned.mapping);
        }
    } else {
        if (!same_symbol_set(final_part.symbols, part.symbols)) {
            const CeeTables tables(state.phi);
            current.mapping = reassign_all(final_part.symbols, current.dict, tables);
        }
        state.symbols = std::move(final_part.symbols);
    }
    if (state.symbols.empty()) {
        current.dict = Dictionary{};
        current.mapping = SymbolMapping{};
    } else {
        prune_unused_entries(current.dict, current.mapping);
    }
    state.dict = std::move(current.dict);
    state.mapping = std::move(current.mapping);

    // Recorded totals are a from-scratch evaluation of the packaged state.
    state.likelihood_nats = neg_log_likelihood(y, state.x, filter);
    if (mrf) {
        state.total_nats =
            state.likelihood_nats + config.mrf_beta * mrf_energy(state.x);
    } else {
        const CeeTables tables(state.phi);
        state.total_nats =
            state.likelihood_nats +
            total_cee_nats(state.symbols, state.dict, state.mapping, tables) +
            dict_cost_nats(state.dict) + phi_regularizer_nats(state.phi);
    }
    return state;
}

RestorationState restore_mrf(const BinaryImage& y, RestorationConfig config) {
    config.prior = PriorKind::mrf;
    return restore(y, config);
}

void write_trace_csv(const std::vector<TraceRow>& trace,
                     const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << "iteration,phase,epoch,likelihood_nats,prior_nats,total_nats,pixels_flipped\n";
    char buf[160];
    for (const TraceRow& row : trace) {
        std::snprintf(buf, sizeof buf, "%d,%s,%d,%.9f,%.9f,%.9f,%lld\n", row.iteration,
                      row.phase.c_str(), row.epoch, row.likelihood_nats, row.prior_nats,
                      row.total_nats, static_cast<long long>(row.flips));
        f << buf;
    }
}

} // namespace mbdl
