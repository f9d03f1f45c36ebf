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

#ifndef MBDL_RESTORATION_HPP
#define MBDL_RESTORATION_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "mbdl/binary_image.hpp"
#include "mbdl/context_model.hpp"
#include "mbdl/dictionary.hpp"
#include "mbdl/forward_model.hpp"
#include "mbdl/symbols.hpp"

namespace mbdl {

enum class PriorKind { dictionary, mrf };

struct RestorationConfig {
    double sigma2 = 0.2;        ///< variance of the assumed scanner PSF
    int filter_size = 3;
    double beta_a = 2.0;        ///< Beta shape for the phi prior
    double beta_b = 2.0;
    int max_outer = 10;
    int max_inner = 3;          ///< raster sweeps per outer iteration
    double conv_threshold = 1e-5;  ///< relative total-cost change
    PriorKind prior = PriorKind::dictionary;
    double mrf_beta = 1.0;      ///< clique weight for the MRF baseline
    i64 oversize_threshold = 10000;  ///< larger boxes become generic content
    WxorConfig wxor;            ///< initial dictionary construction
    ClusterConfig cluster;
};

/// One committed step of the optimization. total_nats is the full objective
/// (likelihood + symbol code length + dictionary penalty + phi regularizer,
/// all nats); prior_nats is everything except the likelihood. The epoch
/// increments whenever re-extraction changes the symbol set, which re-bases
/// the prior sum; costs are comparable only within one epoch.
struct TraceRow {
    int iteration = 0;
    std::string phase;
    double likelihood_nats = 0.0;
    double prior_nats = 0.0;
    double total_nats = 0.0;
    i64 flips = 0;
    int epoch = 0;
};

struct RestorationState {
    BinaryImage x;             ///< restored image
    std::vector<Symbol> symbols;  ///< final segmentation (mapped symbols)
    std::vector<Symbol> generic;  ///< oversized pass-through components
    Dictionary dict;
    SymbolMapping mapping;
    ContextModel phi = ContextModel::uniform();
    double total_nats = 0.0;
    double likelihood_nats = 0.0;
    int iterations = 0;
    std::vector<TraceRow> trace;
    /// max |cached - recomputed| / max(1, |recomputed|) seen at outer-iteration
    /// boundaries; the incremental bookkeeping contract.
    double max_cache_drift = 0.0;
};

/// MRF prior delta (nats): change of beta * sum_{8-neighbor cliques at u}
/// |x_u - x_l| when x_u flips. Cliques exist only between in-bounds pixels.
double delta_prior_mrf(const BinaryImage& x, int row, int col, double beta);

/// The alternating restoration loop: x starts at y, the initial dictionary
/// comes from WXOR clustering, then each outer iteration re-estimates phi,
/// rebuilds the dictionary (keeping the previous one when rebuilding would
/// not help), and runs raster sweeps of single-pixel updates.
RestorationState restore(const BinaryImage& y, const RestorationConfig& config);

/// Same loop with the 8-neighborhood MRF prior replacing the dictionary
/// prior; dictionary learning still runs once at the end so the result can
/// be encoded with a CEE dictionary.
RestorationState restore_mrf(const BinaryImage& y, RestorationConfig config);

void write_trace_csv(const std::vector<TraceRow>& trace,
                     const std::filesystem::path& path);

/// Sweep-grain access for tests: a workspace holding the cached mu, the
/// symbol patches and the ownership map used by pixel updates.
class SweepWorkspace {
public:
    SweepWorkspace(const BinaryImage& y, BinaryImage x, std::vector<Symbol> symbols,
                   Dictionary dict, SymbolMapping mapping, const ContextModel& phi,
                   const RestorationConfig& config);

    /// Dictionary-prior delta (nats) for flipping the pixel; prior-neutral
    /// (0) outside every symbol box.
    double delta_prior_dl(int row, int col) const;

    /// Likelihood delta (nats) for flipping the pixel, from the cached mu.
    double delta_likelihood(int row, int col) const;

    /// Applies the Eq-style single-pixel rule: flips iff the total delta is
    /// strictly negative (ties keep the current value). Returns whether the
    /// pixel changed and maintains the cached cost.
    bool pixel_update(int row, int col);

    /// One raster sweep over the dilated symbol-box union.
    i64 sweep();

    const BinaryImage& x() const { return x_; }
    const Dictionary& dict() const { return dict_; }
    double cee_nats_total() const { return cee_nats_total_; }
    double likelihood_nats() const { return likelihood_nats_; }
    double mrf_nats() const { return mrf_energy_nats_; }
    i64 owner_of(int row, int col) const;  ///< symbol index or -1

    /// Full from-scratch recomputation of likelihood + cee (oracle for the
    /// incremental bookkeeping).
    double recompute_likelihood_nats() const;
    double recompute_cee_nats() const;

    std::vector<Symbol> release_symbols();
    BinaryImage release_x();
    Dictionary release_dict();
    SymbolMapping release_mapping();

private:
    const BinaryImage& y_;
    BinaryImage x_;
    LowPassFilter filter_;
    GrayImage mu_;
    std::vector<Symbol> symbols_;
    Dictionary dict_;
    SymbolMapping mapping_;
    CeeTables tables_;
    RestorationConfig config_;
    std::vector<i32> owner_;       ///< per-pixel owning symbol, -1 none
    std::vector<u8> sweep_mask_;   ///< dilated symbol-box union
    double likelihood_nats_ = 0.0;
    double cee_nats_total_ = 0.0;
    double mrf_energy_nats_ = 0.0;

    double patch_term_nats(const Symbol& s, const Assignment& a, int r, int c) const;
    double delta_prior_nats(int row, int col) const;
};

} // namespace mbdl

#endif // MBDL_RESTORATION_HPP
