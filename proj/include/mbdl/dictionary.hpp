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

#ifndef MBDL_DICTIONARY_HPP
#define MBDL_DICTIONARY_HPP

#include <filesystem>
#include <vector>

#include "mbdl/binary_image.hpp"
#include "mbdl/context_model.hpp"
#include "mbdl/symbols.hpp"

namespace mbdl {

struct DictionaryEntry {
    int id = 0;
    BinaryImage bitmap;
};

/// Ordered entry list; ids are contiguous and no two bitmaps are identical.
struct Dictionary {
    std::vector<DictionaryEntry> entries;

    int size() const { return static_cast<int>(entries.size()); }
    bool empty() const { return entries.empty(); }
};

/// Per-symbol entry choice and registration offset.
struct Assignment {
    int entry = 0;
    Alignment align;
};

struct SymbolMapping {
    std::vector<Assignment> assign;  ///< indexed by symbol id
};

/// Estimated bits to code an entry standalone: fixed 2x16 header bits for
/// the dimensions plus per-pixel bits under the causal 10-pixel adaptive
/// model started uniform. This is the dictionary-size penalty: the prior
/// literally prices what the dictionary segment will pay.
double entry_cost_bits(const BinaryImage& bitmap);

/// argmin over entries of the conditional code length under centroid
/// alignment; ties go to the lowest entry id. Throws on an empty dictionary.
Assignment select_entry(const Symbol& sym, const Dictionary& dict,
                        const CeeTables& tables);

struct ClusterConfig {
    bool prune = true;        ///< gate candidate pairs cheaply
    int max_dim_delta = 2;    ///< box dims may differ by at most this much
    int density_threshold = 640;  ///< max L1 distance of 4x4 density signatures
    int max_exact_medoid = 48;    ///< exact medoid recompute up to this cluster size
};

struct ClusterResult {
    Dictionary dict;
    SymbolMapping mapping;
    double objective_bits = 0.0;  ///< sum cee + sum entry costs at completion
};

/// Greedy agglomerative clustering in conditional-entropy space. Starts with
/// one cluster per distinct bitmap, repeatedly commits the merge that most
/// decreases
///     sum_i cee_bits(s_i, rep(cluster(i))) + sum_clusters entry_cost(rep)
/// and stops when no merge decreases it. Representatives are medoids; a
/// final reassignment sweep restores per-symbol optimality.
ClusterResult cluster_symbols(const std::vector<Symbol>& symbols,
                              const ContextModel& model,
                              const ClusterConfig& cfg = {});

/// Same skeleton with the WXOR dissimilarity-vs-threshold merge rule and
/// WXOR medoids; used for the WXOR baseline and loop initialization.
ClusterResult build_dictionary_wxor(const std::vector<Symbol>& symbols,
                                    const WxorConfig& wxor,
                                    const ClusterConfig& cfg = {});

struct CeeDictionary {
    Dictionary dict;
    SymbolMapping mapping;
    ContextModel phi = ContextModel::uniform();
    double objective_bits = 0.0;  ///< under phi re-estimated on the result
};

/// The full conditional-entropy dictionary pipeline: WXOR initialization,
/// then alternating phi estimation and greedy re-clustering until the
/// self-consistent objective stops improving.
CeeDictionary learn_cee_dictionary(const std::vector<Symbol>& symbols,
                                   const WxorConfig& wxor, const ClusterConfig& cluster,
                                   double beta_a = 2.0, double beta_b = 2.0,
                                   int max_rounds = 3);

/// Drops entries no symbol maps to and renumbers ids contiguously.
void prune_unused_entries(Dictionary& dict, SymbolMapping& mapping);

/// Inspection dump: one PBM per entry plus an index manifest.
void dump_dictionary(const Dictionary& dict, const std::filesystem::path& dir);

} // namespace mbdl

#endif // MBDL_DICTIONARY_HPP
