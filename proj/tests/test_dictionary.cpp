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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "mbdl/dictionary.hpp"
#include "mbdl/pbm.hpp"
#include "test_oracles.hpp"

using namespace mbdl;
using namespace mbdl::testing;

namespace {

Symbol make_symbol(const BinaryImage& bitmap, int row = 0, int col = 0, int id = 0) {
    Symbol s;
    s.id = id;
    s.row = row;
    s.col = col;
    s.bitmap = bitmap;
    for (int r = 0; r < bitmap.height(); ++r)
        for (int c = 0; c < bitmap.width(); ++c)
            if (bitmap.at(r, c)) {
                ++s.fg_count;
                s.centroid_r_sum += r;
                s.centroid_c_sum += c;
            }
    return s;
}

BinaryImage glyph_a() {
    BinaryImage g(6, 8);
    for (int r = 0; r < 8; ++r) {
        g.set(r, 0, 1);
        g.set(r, 5, 1);
    }
    for (int c = 0; c < 6; ++c) g.set(3, c, 1);
    return g;
}

BinaryImage glyph_b() {
    return BinaryImage(6, 8, 1);  // solid block, >half the pixels away from glyph_a
}

// Corpus of noisy instances of the two glyphs, plus the model trained on the
// identity arrangement (every distinct symbol its own entry).
struct TwoGlyphFixture {
    std::vector<Symbol> symbols;
    ContextModel phi = ContextModel::uniform();
};

TwoGlyphFixture two_glyph_fixture(int per_glyph, u64 seed) {
    TwoGlyphFixture fx;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 2 * per_glyph; ++i) {
        BinaryImage bm = (i % 2 == 0) ? glyph_a() : glyph_b();
        // sparse independent flips; keeps instances near their glyph
        for (int r = 0; r < bm.height(); ++r)
            for (int c = 0; c < bm.width(); ++c)
                if ((rng() % 100) < 4) bm.flip(r, c);
        fx.symbols.push_back(make_symbol(bm, 0, 10 * i, i));
    }
    Dictionary identity;
    SymbolMapping id_map;
    for (usize i = 0; i < fx.symbols.size(); ++i) {
        identity.entries.push_back({static_cast<int>(i), fx.symbols[i].bitmap});
        id_map.assign.push_back({static_cast<int>(i), Alignment{}});
    }
    fx.phi = estimate_phi(accumulate_counts(fx.symbols, identity, id_map), 2.0, 2.0);
    return fx;
}

double arrangement_objective_bits(const std::vector<Symbol>& symbols,
                                  const Dictionary& dict, const SymbolMapping& mapping,
                                  const ContextModel& phi) {
    const CeeTables tables(phi);
    double bits = 0.0;
    for (usize i = 0; i < symbols.size(); ++i) {
        const Assignment& a = mapping.assign[i];
        bits += cee_nats(symbols[i], dict.entries[a.entry].bitmap, a.align, tables) /
                std::numbers::ln2;
    }
    for (const DictionaryEntry& e : dict.entries) bits += entry_cost_bits(e.bitmap);
    return bits;
}

} // namespace

TEST_CASE("entry_cost prices the standalone entry") {
    SUBCASE("a single pixel costs the header plus one uniform bit") {
        CHECK(entry_cost_bits(BinaryImage(1, 1)) == 33.0);
        CHECK(entry_cost_bits(BinaryImage(1, 1, 1)) == 33.0);
    }
    SUBCASE("adaptivity compresses constant regions") {
        CHECK(entry_cost_bits(BinaryImage(8, 8)) < 32.0 + 64.0);
    }
    SUBCASE("growing an entry never lowers its cost") {
        std::mt19937_64 rng(41);
        const BinaryImage base = random_image(7, 9, 0.5, rng);
        double prev = entry_cost_bits(base);
        for (int pad = 1; pad <= 4; ++pad) {
            BinaryImage grown(7 + pad, 9 + pad);
            for (int r = 0; r < 9; ++r)
                for (int c = 0; c < 7; ++c) grown.set(r, c, base.at(r, c));
            const double cost = entry_cost_bits(grown);
            CHECK(cost > prev);
            prev = cost;
        }
    }
}

TEST_CASE("select_entry minimizes the conditional code length") {
    TwoGlyphFixture fx = two_glyph_fixture(6, 5);
    const CeeTables tables(fx.phi);

    SUBCASE("a bit-identical entry wins under the trained model") {
        Dictionary dict;
        dict.entries.push_back({0, glyph_b()});
        dict.entries.push_back({1, fx.symbols[0].bitmap});
        dict.entries.push_back({2, glyph_a()});
        const Assignment a = select_entry(fx.symbols[0], dict, tables);
        CHECK(a.entry == 1);
    }
    SUBCASE("a single-entry dictionary is always chosen") {
        Dictionary dict;
        dict.entries.push_back({0, glyph_b()});
        CHECK(select_entry(fx.symbols[0], dict, tables).entry == 0);
    }
    SUBCASE("ties break toward the lower id") {
        Dictionary dict;
        dict.entries.push_back({0, glyph_a()});
        dict.entries.push_back({1, glyph_a()});
        CHECK(select_entry(fx.symbols[0], dict, tables).entry == 0);
    }
    SUBCASE("an empty dictionary is an error") {
        CHECK_THROWS_AS(select_entry(fx.symbols[0], Dictionary{}, tables),
                        std::invalid_argument);
    }
}

TEST_CASE("cluster_symbols merges greedily in entropy space") {
    SUBCASE("identical symbols collapse to one entry") {
        std::vector<Symbol> syms;
        for (int i = 0; i < 10; ++i) syms.push_back(make_symbol(glyph_a(), 0, 10 * i, i));
        const ClusterResult res = cluster_symbols(syms, ContextModel::uniform());
        CHECK(res.dict.size() == 1);
        for (const Assignment& a : res.mapping.assign) CHECK(a.entry == 0);
    }
    SUBCASE("two distinct populations give two entries") {
        TwoGlyphFixture fx = two_glyph_fixture(8, 6);
        // populations differ in more than half their pixels
        CHECK(error_count(glyph_a(), glyph_b()).count * 2 >
              static_cast<u64>(glyph_a().area()));
        const ClusterResult res = cluster_symbols(fx.symbols, fx.phi);
        // every glyph-a symbol shares an entry, every glyph-b symbol shares
        // another
        for (usize i = 2; i < fx.symbols.size(); ++i)
            CHECK(res.mapping.assign[i].entry == res.mapping.assign[i % 2].entry);
        CHECK(res.mapping.assign[0].entry != res.mapping.assign[1].entry);

        // the two-cluster solution beats the one-cluster solution by direct
        // objective evaluation
        const double two_clusters = arrangement_objective_bits(
            fx.symbols, res.dict, res.mapping, fx.phi);
        Dictionary one;
        one.entries.push_back({0, res.dict.entries[0].bitmap});
        SymbolMapping one_map;
        const CeeTables tables(fx.phi);
        for (const Symbol& s : fx.symbols)
            one_map.assign.push_back(select_entry(s, one, tables));
        CHECK(two_clusters <
              arrangement_objective_bits(fx.symbols, one, one_map, fx.phi));
    }
    SUBCASE("the objective never exceeds the unmerged starting point") {
        TwoGlyphFixture fx = two_glyph_fixture(7, 7);
        const ClusterResult res = cluster_symbols(fx.symbols, fx.phi);

        Dictionary initial;
        SymbolMapping init_map;
        init_map.assign.resize(fx.symbols.size());
        for (usize i = 0; i < fx.symbols.size(); ++i) {
            int found = -1;
            for (const DictionaryEntry& e : initial.entries)
                if (e.bitmap == fx.symbols[i].bitmap) found = e.id;
            if (found < 0) {
                found = initial.size();
                initial.entries.push_back({found, fx.symbols[i].bitmap});
            }
            init_map.assign[i] = {found, Alignment{}};
        }
        CHECK(res.objective_bits <=
              arrangement_objective_bits(fx.symbols, initial, init_map, fx.phi) + 1e-9);
        CHECK(res.objective_bits ==
              doctest::Approx(arrangement_objective_bits(fx.symbols, res.dict,
                                                         res.mapping, fx.phi)));
    }
    SUBCASE("entries are deduplicated and mapping is self-consistent") {
        TwoGlyphFixture fx = two_glyph_fixture(6, 8);
        const ClusterResult res = cluster_symbols(fx.symbols, fx.phi);
        for (int i = 0; i < res.dict.size(); ++i)
            for (int j = i + 1; j < res.dict.size(); ++j)
                CHECK(res.dict.entries[i].bitmap != res.dict.entries[j].bitmap);
        const CeeTables tables(fx.phi);
        for (usize i = 0; i < fx.symbols.size(); ++i) {
            const Assignment want = select_entry(fx.symbols[i], res.dict, tables);
            CHECK(want.entry == res.mapping.assign[i].entry);
        }
    }
    SUBCASE("identical inputs give identical outputs") {
        TwoGlyphFixture fx = two_glyph_fixture(6, 9);
        const ClusterResult a = cluster_symbols(fx.symbols, fx.phi);
        const ClusterResult b = cluster_symbols(fx.symbols, fx.phi);
        REQUIRE(a.dict.size() == b.dict.size());
        for (int i = 0; i < a.dict.size(); ++i)
            CHECK(a.dict.entries[i].bitmap == b.dict.entries[i].bitmap);
        for (usize i = 0; i < a.mapping.assign.size(); ++i)
            CHECK(a.mapping.assign[i].entry == b.mapping.assign[i].entry);
    }
}

TEST_CASE("build_dictionary_wxor clusters against the threshold") {
    TwoGlyphFixture fx = two_glyph_fixture(6, 10);
    int distinct = 0;
    {
        std::vector<BinaryImage> seen;
        for (const Symbol& s : fx.symbols) {
            bool found = false;
            for (const auto& bm : seen) found = found || bm == s.bitmap;
            if (!found) seen.push_back(s.bitmap);
        }
        distinct = static_cast<int>(seen.size());
    }
    SUBCASE("tau 0 keeps one entry per distinct bitmap") {
        WxorConfig w;
        w.tau = 0.0;
        CHECK(build_dictionary_wxor(fx.symbols, w).dict.size() == distinct);
    }
    SUBCASE("tau infinity merges everything") {
        WxorConfig w;
        w.tau = 1e30;
        ClusterConfig cc;
        cc.prune = false;
        CHECK(build_dictionary_wxor(fx.symbols, w, cc).dict.size() == 1);
    }
    SUBCASE("a mid threshold separates the two glyph populations") {
        WxorConfig w;  // defaults: normalized, tau 0.12
        const ClusterResult res = build_dictionary_wxor(fx.symbols, w);
        CHECK(res.dict.size() == 2);
        CHECK(res.mapping.assign[0].entry != res.mapping.assign[1].entry);
    }
}

TEST_CASE("prune_unused_entries compacts ids") {
    Dictionary dict;
    dict.entries.push_back({0, glyph_a()});
    dict.entries.push_back({1, glyph_b()});
    dict.entries.push_back({2, BinaryImage(2, 2, 1)});
    SymbolMapping mapping;
    mapping.assign = {{2, {}}, {0, {}}, {2, {}}};
    prune_unused_entries(dict, mapping);
    REQUIRE(dict.size() == 2);
    CHECK(dict.entries[0].bitmap == glyph_a());
    CHECK(dict.entries[1].bitmap == BinaryImage(2, 2, 1));
    CHECK(mapping.assign[0].entry == 1);
    CHECK(mapping.assign[1].entry == 0);
    CHECK(mapping.assign[2].entry == 1);
}

TEST_CASE("dump_dictionary writes inspectable entries") {
    Dictionary dict;
    dict.entries.push_back({0, glyph_a()});
    dict.entries.push_back({1, glyph_b()});
    const auto dir = std::filesystem::temp_directory_path() / "mbdl_dict_dump";
    std::filesystem::remove_all(dir);
    dump_dictionary(dict, dir);
    CHECK(load_image(dir / "entry_0000.pbm") == glyph_a());
    CHECK(load_image(dir / "entry_0001.pbm") == glyph_b());
    std::ifstream manifest(dir / "manifest.json");
    std::string text{std::istreambuf_iterator<char>(manifest),
                     std::istreambuf_iterator<char>()};
    CHECK(text.find("\"entries\"") != std::string::npos);
    CHECK(text.find("entry_0001.pbm") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("learn_cee_dictionary improves on its wxor start") {
    TwoGlyphFixture fx = two_glyph_fixture(8, 11);
    const CeeDictionary learned = learn_cee_dictionary(fx.symbols, WxorConfig{}, {});
    CHECK(learned.dict.size() >= 1);
    CHECK(learned.mapping.assign.size() == fx.symbols.size());
    // self-consistent objective is recorded
    CHECK(learned.objective_bits > 0.0);
}
