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

#include "mbdl/dictionary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "mbdl/adaptive_model.hpp"
#include "mbdl/pbm.hpp"

namespace mbdl {

double entry_cost_bits(const BinaryImage& bitmap) {
    if (bitmap.empty())
        throw std::invalid_argument("entry_cost_bits: empty bitmap");
    double bits = 32.0;  // 2 x 16 header bits for the dimensions
    std::vector<BitModel> ctx(kContextCount);
    for (int r = 0; r < bitmap.height(); ++r) {
        for (int c = 0; c < bitmap.width(); ++c) {
            const u32 cx = generic_context(bitmap, r, c);
            const int bit = bitmap.at(r, c);
            bits += ctx[cx].cost_bits(bit);
            ctx[cx].update(bit);
        }
    }
    return bits;
}

Assignment select_entry(const Symbol& sym, const Dictionary& dict,
                        const CeeTables& tables) {
    if (dict.empty())
        throw std::invalid_argument("select_entry: empty dictionary");
    Assignment best;
    double best_nats = std::numeric_limits<double>::infinity();
    for (const DictionaryEntry& e : dict.entries) {
        const Alignment align = centroid_alignment(sym, e.bitmap);
        // Bounded scan: a candidate that passes the incumbent mid-patch can
        // only finish worse, and exact ties keep the lowest id because the
        // bound only fires on strictly greater partial sums.
        const double nats = cee_nats_bounded(sym, e.bitmap, align, tables, best_nats);
        if (nats < best_nats) {
            best_nats = nats;
            best = Assignment{e.id, align};
        }
    }
    return best;
}

namespace {

// ---------------------------------------------------------------------------
// Shared agglomeration skeleton. Works on distinct bitmaps so repeated glyphs
// collapse to one prototype with a multiplicity.
// ---------------------------------------------------------------------------

struct DistinctGroup {
    Symbol proto;              // shares bitmap/centroid with every member
    std::vector<int> members;  // symbol indices
    std::array<u8, 16> density{};  // 4x4 foreground-density signature (0..255)
};

u64 bitmap_hash(const BinaryImage& bm) {
    u64 h = mix64(static_cast<u64>(bm.width()), static_cast<u64>(bm.height()));
    for (u8 v : bm.pixels()) h = mix64(h ^ v);
    return h;
}

std::array<u8, 16> density_signature(const BinaryImage& bm) {
    std::array<u8, 16> sig{};
    for (int cell = 0; cell < 16; ++cell) {
        const int gr = cell / 4, gc = cell % 4;
        const int r0 = gr * bm.height() / 4, r1 = (gr + 1) * bm.height() / 4;
        const int c0 = gc * bm.width() / 4, c1 = (gc + 1) * bm.width() / 4;
        int fg = 0, area = 0;
        for (int r = r0; r < r1; ++r)
            for (int c = c0; c < c1; ++c) {
                fg += bm.at(r, c);
                ++area;
            }
        sig[cell] = area ? static_cast<u8>(255 * fg / area) : u8{0};
    }
    return sig;
}

std::vector<DistinctGroup> collect_groups(const std::vector<Symbol>& symbols) {
    std::vector<DistinctGroup> groups;
    std::unordered_map<u64, std::vector<int>> by_hash;
    for (usize i = 0; i < symbols.size(); ++i) {
        const Symbol& s = symbols[i];
        const u64 h = bitmap_hash(s.bitmap);
        int found = -1;
        for (int gi : by_hash[h]) {
            if (groups[gi].proto.bitmap == s.bitmap) {
                found = gi;
                break;
            }
        }
        if (found < 0) {
            found = static_cast<int>(groups.size());
            DistinctGroup g;
            g.proto = s;
            g.density = density_signature(s.bitmap);
            groups.push_back(std::move(g));
            by_hash[h].push_back(found);
        }
        groups[found].members.push_back(static_cast<int>(i));
    }
    return groups;
}

bool prune_compatible(const DistinctGroup& a, const DistinctGroup& b,
                      const ClusterConfig& cfg) {
    if (!cfg.prune) return true;
    if (std::abs(a.proto.width() - b.proto.width()) > cfg.max_dim_delta) return false;
    if (std::abs(a.proto.height() - b.proto.height()) > cfg.max_dim_delta) return false;
    int l1 = 0;
    for (int i = 0; i < 16; ++i)
        l1 += std::abs(static_cast<int>(a.density[i]) - static_cast<int>(b.density[i]));
    return l1 <= cfg.density_threshold;
}

struct Cluster {
    std::vector<int> groups;  // distinct-group indices
    int rep = -1;             // group index of the medoid
    double member_score = 0.0;  // sum over member symbols of score(sym, rep)
    bool alive = true;
    i64 symbol_count = 0;
};

// Pairwise score cache keyed by (group, rep-group).
class ScoreCache {
public:
    explicit ScoreCache(usize groups) : n_(groups) {}

    template <typename F>
    double get(int g, int rep, F&& compute) {
        const u64 key = static_cast<u64>(g) * n_ + rep;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double v = compute();
        cache_.emplace(key, v);
        return v;
    }

private:
    usize n_;
    std::unordered_map<u64, double> cache_;
};

} // namespace

ClusterResult cluster_symbols(const std::vector<Symbol>& symbols,
                              const ContextModel& model,
                              const ClusterConfig& cfg) {
    ClusterResult out;
    if (symbols.empty()) return out;

    const CeeTables tables(model);
    std::vector<DistinctGroup> groups = collect_groups(symbols);
    const int ng = static_cast<int>(groups.size());

    ScoreCache cee_cache(groups.size());
    auto group_cee = [&](int g, int rep) {
        return cee_cache.get(g, rep, [&] {
            const Alignment align =
                centroid_alignment(groups[g].proto, groups[rep].proto.bitmap);
            return cee_nats(groups[g].proto, groups[rep].proto.bitmap, align, tables) /
                   std::numbers::ln2;
        });
    };
    std::vector<double> rep_cost(groups.size(), -1.0);
    auto group_cost = [&](int g) {
        if (rep_cost[g] < 0.0) rep_cost[g] = entry_cost_bits(groups[g].proto.bitmap);
        return rep_cost[g];
    };

    std::vector<Cluster> clusters(groups.size());
    for (int g = 0; g < ng; ++g) {
        clusters[g].groups = {g};
        clusters[g].rep = g;
        clusters[g].member_score =
            static_cast<double>(groups[g].members.size()) * group_cee(g, g);
        clusters[g].symbol_count = static_cast<i64>(groups[g].members.size());
    }

    auto cluster_obj = [&](const Cluster& c) {
        return c.member_score + group_cost(c.rep);
    };

    struct Candidate {
        int a, b;
        double gain;
        int rep;
        double merged_score;
    };

    // Gain of merging a and b with the representative restricted to the two
    // current medoids; the exact medoid is refreshed after committing.
    auto evaluate = [&](int a, int b) -> Candidate {
        Candidate cand{a, b, std::numeric_limits<double>::infinity(), -1, 0.0};
        const double before = cluster_obj(clusters[a]) + cluster_obj(clusters[b]);
        for (int rep : {clusters[a].rep, clusters[b].rep}) {
            double score = 0.0;
            for (int ci : {a, b})
                for (int g : clusters[ci].groups)
                    score += static_cast<double>(groups[g].members.size()) *
                             group_cee(g, rep);
            const double gain = score + group_cost(rep) - before;
            if (gain < cand.gain) {
                cand.gain = gain;
                cand.rep = rep;
                cand.merged_score = score;
            }
        }
        return cand;
    };

    std::vector<Candidate> cands;
    for (int a = 0; a < ng; ++a)
        for (int b = a + 1; b < ng; ++b)
            if (prune_compatible(groups[a], groups[b], cfg))
                cands.push_back(evaluate(a, b));

    while (true) {
        int best = -1;
        for (usize i = 0; i < cands.size(); ++i) {
            if (!clusters[cands[i].a].alive || !clusters[cands[i].b].alive) continue;
            if (best < 0 || cands[i].gain < cands[best].gain) best = static_cast<int>(i);
        }
        if (best < 0 || cands[best].gain >= 0.0) break;

        const Candidate chosen = cands[best];
        Cluster& dst = clusters[chosen.a];
        Cluster& src = clusters[chosen.b];
        dst.groups.insert(dst.groups.end(), src.groups.begin(), src.groups.end());
        dst.rep = chosen.rep;
        dst.member_score = chosen.merged_score;
        dst.symbol_count += src.symbol_count;
        src.alive = false;

        // Exact medoid over the merged members (small clusters only): the
        // member bitmap minimizing total cee to all members. Guard: commit it
        // only if the cluster's objective share does not grow, so every step
        // stays a descent step even when entry costs differ.
        if (static_cast<int>(dst.groups.size()) <= cfg.max_exact_medoid) {
            int medoid = dst.rep;
            double medoid_score = dst.member_score;
            for (int candidate : dst.groups) {
                double score = 0.0;
                for (int g : dst.groups)
                    score += static_cast<double>(groups[g].members.size()) *
                             group_cee(g, candidate);
                if (score < medoid_score ||
                    (score == medoid_score && candidate < medoid)) {
                    medoid = candidate;
                    medoid_score = score;
                }
            }
            if (medoid != dst.rep &&
                medoid_score + group_cost(medoid) <=
                    dst.member_score + group_cost(dst.rep)) {
                dst.rep = medoid;
                dst.member_score = medoid_score;
            }
        }

        // Refresh candidates touching the merged cluster.
        std::erase_if(cands, [&](const Candidate& c) {
            return c.a == chosen.a || c.b == chosen.a || c.a == chosen.b ||
                   c.b == chosen.b;
        });
        for (int other = 0; other < static_cast<int>(clusters.size()); ++other) {
            if (other == chosen.a || !clusters[other].alive) continue;
            const int a = std::min(other, chosen.a), b = std::max(other, chosen.a);
            if (prune_compatible(groups[clusters[a].rep], groups[clusters[b].rep], cfg))
                cands.push_back(evaluate(a, b));
        }
    }

    // Materialize the dictionary: surviving clusters ordered by their first
    // member symbol, representatives deduplicated.
    std::vector<int> alive;
    for (int ci = 0; ci < static_cast<int>(clusters.size()); ++ci)
        if (clusters[ci].alive) alive.push_back(ci);
    std::sort(alive.begin(), alive.end(), [&](int a, int b) {
        int ma = symbols.size(), mb = symbols.size();
        for (int g : clusters[a].groups) ma = std::min(ma, groups[g].members.front());
        for (int g : clusters[b].groups) mb = std::min(mb, groups[g].members.front());
        return ma < mb;
    });

    std::unordered_map<u64, std::vector<int>> entry_by_hash;
    for (int ci : alive) {
        const BinaryImage& bm = groups[clusters[ci].rep].proto.bitmap;
        const u64 h = bitmap_hash(bm);
        int found = -1;
        for (int ei : entry_by_hash[h])
            if (out.dict.entries[ei].bitmap == bm) {
                found = ei;
                break;
            }
        if (found < 0) {
            found = out.dict.size();
            out.dict.entries.push_back({found, bm});
            entry_by_hash[h].push_back(found);
        }
    }

    // Final reassignment sweep (per distinct group; members share bitmaps).
    out.mapping.assign.resize(symbols.size());
    double cee_total = 0.0;
    for (const DistinctGroup& g : groups) {
        const Assignment a = select_entry(g.proto, out.dict, tables);
        const double bits =
            cee_nats(g.proto, out.dict.entries[a.entry].bitmap, a.align, tables) /
            std::numbers::ln2;
        cee_total += bits * static_cast<double>(g.members.size());
        for (int si : g.members) out.mapping.assign[si] = a;
    }
    out.objective_bits = cee_total;
    for (const DictionaryEntry& e : out.dict.entries)
        out.objective_bits += entry_cost_bits(e.bitmap);
    return out;
}

ClusterResult build_dictionary_wxor(const std::vector<Symbol>& symbols,
                                    const WxorConfig& wxor,
                                    const ClusterConfig& cfg) {
    ClusterResult out;
    if (symbols.empty()) return out;

    std::vector<DistinctGroup> groups = collect_groups(symbols);
    const int ng = static_cast<int>(groups.size());

    ScoreCache wxor_cache(groups.size());
    auto group_wxor = [&](int g, int rep) {
        return wxor_cache.get(g, rep, [&] {
            const Alignment align =
                centroid_alignment(groups[g].proto, groups[rep].proto.bitmap);
            return wxor_dissimilarity(groups[g].proto, groups[rep].proto.bitmap,
                                      align, wxor);
        });
    };

    std::vector<Cluster> clusters(groups.size());
    for (int g = 0; g < ng; ++g) {
        clusters[g].groups = {g};
        clusters[g].rep = g;
        clusters[g].symbol_count = static_cast<i64>(groups[g].members.size());
    }

    while (true) {
        int best_a = -1, best_b = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int a = 0; a < static_cast<int>(clusters.size()); ++a) {
            if (!clusters[a].alive) continue;
            for (int b = a + 1; b < static_cast<int>(clusters.size()); ++b) {
                if (!clusters[b].alive) continue;
                if (!prune_compatible(groups[clusters[a].rep], groups[clusters[b].rep],
                                      cfg))
                    continue;
                const double d = group_wxor(clusters[a].rep, clusters[b].rep);
                if (d < best_d) {
                    best_d = d;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (best_a < 0 || best_d > wxor.tau) break;

        Cluster& dst = clusters[best_a];
        Cluster& src = clusters[best_b];
        dst.groups.insert(dst.groups.end(), src.groups.begin(), src.groups.end());
        dst.symbol_count += src.symbol_count;
        src.alive = false;

        if (static_cast<int>(dst.groups.size()) <= cfg.max_exact_medoid) {
            double best_total = std::numeric_limits<double>::infinity();
            int best_rep = dst.rep;
            for (int candidate : dst.groups) {
                double total = 0.0;
                for (int g : dst.groups)
                    total += static_cast<double>(groups[g].members.size()) *
                             group_wxor(g, candidate);
                if (total < best_total) {
                    best_total = total;
                    best_rep = candidate;
                }
            }
            dst.rep = best_rep;
        }
    }

    std::vector<int> alive;
    for (int ci = 0; ci < static_cast<int>(clusters.size()); ++ci)
        if (clusters[ci].alive) alive.push_back(ci);
    std::sort(alive.begin(), alive.end(), [&](int a, int b) {
        int ma = symbols.size(), mb = symbols.size();
        for (int g : clusters[a].groups) ma = std::min(ma, groups[g].members.front());
        for (int g : clusters[b].groups) mb = std::min(mb, groups[g].members.front());
        return ma < mb;
    });

    out.mapping.assign.resize(symbols.size());
    std::unordered_map<u64, std::vector<int>> entry_by_hash;
    for (int ci : alive) {
        const BinaryImage& bm = groups[clusters[ci].rep].proto.bitmap;
        const u64 h = bitmap_hash(bm);
        int entry = -1;
        for (int ei : entry_by_hash[h])
            if (out.dict.entries[ei].bitmap == bm) {
                entry = ei;
                break;
            }
        if (entry < 0) {
            entry = out.dict.size();
            out.dict.entries.push_back({entry, bm});
            entry_by_hash[h].push_back(entry);
        }
        for (int g : clusters[ci].groups) {
            const Alignment align = centroid_alignment(groups[g].proto, bm);
            for (int si : groups[g].members)
                out.mapping.assign[si] = Assignment{entry, align};
        }
    }
    return out;
}

namespace {

// Objective under phi re-estimated on the arrangement itself; the common
// yardstick for comparing rounds learned under different models.
double self_objective_bits(const std::vector<Symbol>& symbols, const Dictionary& dict,
                           const SymbolMapping& mapping, double a, double b) {
    const ContextCounts counts = accumulate_counts(symbols, dict, mapping);
    const ContextModel phi = estimate_phi(counts, a, b);
    const CeeTables tables(phi);
    double bits = 0.0;
    for (usize i = 0; i < symbols.size(); ++i) {
        const Assignment& as = mapping.assign[i];
        bits += cee_nats(symbols[i], dict.entries[as.entry].bitmap, as.align, tables) /
                std::numbers::ln2;
    }
    for (const DictionaryEntry& e : dict.entries) bits += entry_cost_bits(e.bitmap);
    return bits;
}

} // namespace

CeeDictionary learn_cee_dictionary(const std::vector<Symbol>& symbols,
                                   const WxorConfig& wxor, const ClusterConfig& cluster,
                                   double beta_a, double beta_b, int max_rounds) {
    CeeDictionary out;
    if (symbols.empty()) return out;

    ClusterResult current = build_dictionary_wxor(symbols, wxor, cluster);
    double best_obj = std::numeric_limits<double>::infinity();
    for (int round = 0; round < max_rounds; ++round) {
        const ContextCounts counts =
            accumulate_counts(symbols, current.dict, current.mapping);
        const ContextModel phi = estimate_phi(counts, beta_a, beta_b);
        ClusterResult cand = cluster_symbols(symbols, phi, cluster);
        const double obj =
            self_objective_bits(symbols, cand.dict, cand.mapping, beta_a, beta_b);
        if (obj < best_obj) {
            best_obj = obj;
            out.dict = cand.dict;
            out.mapping = cand.mapping;
            out.objective_bits = obj;
        } else {
            break;
        }
        current = std::move(cand);
    }
    const ContextCounts counts = accumulate_counts(symbols, out.dict, out.mapping);
    out.phi = estimate_phi(counts, beta_a, beta_b);
    return out;
}

void prune_unused_entries(Dictionary& dict, SymbolMapping& mapping) {
    std::vector<int> remap(dict.entries.size(), -1);
    for (const Assignment& a : mapping.assign) remap.at(a.entry) = 0;
    Dictionary pruned;
    for (usize i = 0; i < dict.entries.size(); ++i) {
        if (remap[i] < 0) continue;
        remap[i] = pruned.size();
        pruned.entries.push_back({remap[i], std::move(dict.entries[i].bitmap)});
    }
    for (Assignment& a : mapping.assign) a.entry = remap[a.entry];
    dict = std::move(pruned);
}

void dump_dictionary(const Dictionary& dict, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string manifest = "{\n  \"entries\": [\n";
    for (const DictionaryEntry& e : dict.entries) {
        char name[32];
        std::snprintf(name, sizeof name, "entry_%04d.pbm", e.id);
        save_image(e.bitmap, dir / name, PbmFormat::P4);
        manifest += "    {\"id\": " + std::to_string(e.id) +
                    ", \"file\": \"" + name +
                    "\", \"width\": " + std::to_string(e.bitmap.width()) +
                    ", \"height\": " + std::to_string(e.bitmap.height()) + "}";
        manifest += (e.id + 1 < dict.size()) ? ",\n" : "\n";
    }
    manifest += "  ]\n}\n";
    std::ofstream f(dir / "manifest.json", std::ios::trunc);
    f << manifest;
}

} // namespace mbdl
