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

#ifndef MBDL_BENCH_HPP
#define MBDL_BENCH_HPP

#include <string>
#include <utility>
#include <vector>

#include "mbdl/codec.hpp"

namespace mbdl {

/// The synthetic-noise evaluation protocol: for every clean page and noise
/// level, synthesize a noisy observation, run each method, and record the
/// error-pixel count against the clean page plus the bitstream size.
struct BenchConfig {
    std::vector<double> sigmas{0.1, 0.12, 0.14, 0.16};
    std::vector<Mode> methods{Mode::wxor_lossless, Mode::cee_lossless, Mode::mbir_mrf,
                              Mode::mbir_dl};
    u64 seed = 1;
    RestorationConfig restoration;
    int workers = 0;             ///< 0: MBDL_WORKERS env var or hardware count
    bool keep_artifacts = false; ///< retain bitstreams and traces per row
    std::string corpus_note;     ///< recorded in the CSV header (corpus scale)
};

struct BenchRow {
    std::string image;
    Mode method = Mode::mbir_dl;
    double sigma2 = 0.0;
    u64 noise_seed = 0;
    u64 error_pixels = 0;        ///< vs the clean page
    u64 noisy_error_pixels = 0;  ///< the unrestored baseline for this cell
    u64 bytes = 0;
    double ratio = 0.0;
    bool lossless = false;       ///< decode(bitstream) == encoded image
    int symbols = 0;
    int dict_entries = 0;
    u64 refine_bits = 0;
    double refine_estimate_bits = 0.0;      ///< adaptive-model replay estimate
    double refine_map_estimate_bits = 0.0;  ///< static MAP-phi plug-in estimate
    double wall_ms = 0.0;        ///< summary only; never in the CSV

    // retained when keep_artifacts is set
    std::vector<TraceRow> trace;
    double max_cache_drift = 0.0;
    std::vector<u8> bitstream;
};

struct BenchReport {
    BenchConfig config;
    std::vector<BenchRow> rows;  ///< sorted by (image, method, sigma2)

    /// Deterministic: identical corpus/config/seed give identical bytes.
    std::string csv() const;
    /// Human-readable per-method means (includes wall time).
    std::string summary() const;
};

BenchReport run_benchmark(const std::vector<std::pair<std::string, BinaryImage>>& corpus,
                          const BenchConfig& config);

/// Worker count resolution: explicit config, else MBDL_WORKERS, else hardware.
int resolve_workers(int configured);

} // namespace mbdl

#endif // MBDL_BENCH_HPP
