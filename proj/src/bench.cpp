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

#include "mbdl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <thread>

#include "mbdl/forward_model.hpp"

namespace mbdl {

int resolve_workers(int configured) {
    if (configured > 0) return configured;
    if (const char* env = std::getenv("MBDL_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

BenchReport run_benchmark(const std::vector<std::pair<std::string, BinaryImage>>& corpus,
                          const BenchConfig& config) {
    if (corpus.empty()) throw std::invalid_argument("run_benchmark: empty corpus");

    struct Task {
        int page;
        int sigma_index;
    };
    std::vector<Task> tasks;
    for (int p = 0; p < static_cast<int>(corpus.size()); ++p)
        for (int s = 0; s < static_cast<int>(config.sigmas.size()); ++s)
            tasks.push_back({p, s});

    BenchReport report;
    report.config = config;
    report.rows.resize(tasks.size() * config.methods.size());

    std::atomic<usize> next{0};
    auto worker = [&] {
        while (true) {
            const usize t = next.fetch_add(1);
            if (t >= tasks.size()) break;
            const Task& task = tasks[t];
            const auto& [name, clean] = corpus[task.page];
            const double sigma2 = config.sigmas[task.sigma_index];
            const u64 noise_seed = mix64(config.seed, static_cast<u64>(task.page),
                                         static_cast<u64>(task.sigma_index));

            const LowPassFilter noise_filter =
                build_filter(sigma2, config.restoration.filter_size);
            const BinaryImage noisy = synthesize_noisy(clean, noise_filter, noise_seed);
            const u64 noisy_e = error_count(noisy, clean).count;

            for (usize m = 0; m < config.methods.size(); ++m) {
                BenchRow& row = report.rows[t * config.methods.size() + m];
                row.image = name;
                row.method = config.methods[m];
                row.sigma2 = sigma2;
                row.noise_seed = noise_seed;
                row.noisy_error_pixels = noisy_e;

                const auto t0 = std::chrono::steady_clock::now();
                CompressConfig cc;
                cc.mode = row.method;
                cc.restoration = config.restoration;
                CompressResult res = compress(noisy, cc);
                row.error_pixels = error_count(res.encoded_image, clean).count;
                row.bytes = res.bitstream.size();
                row.ratio = res.report.ratio;
                row.symbols = res.report.symbols;
                row.dict_entries = res.report.dict_entries;
                row.refine_bits = res.report.stats.segments.refinement_bytes * 8;
                row.refine_estimate_bits = res.report.refine_estimate_bits;
                row.refine_map_estimate_bits = res.report.refine_map_estimate_bits;
                row.lossless = decode(res.bitstream) == res.encoded_image;
                row.max_cache_drift = res.report.max_cache_drift;
                if (config.keep_artifacts) {
                    row.trace = std::move(res.report.trace);
                    row.bitstream = std::move(res.bitstream);
                }
                row.wall_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
            }
        }
    };

    const int workers = std::max(1, std::min<int>(resolve_workers(config.workers),
                                                  static_cast<int>(tasks.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const BenchRow& a, const BenchRow& b) {
                         if (a.image != b.image) return a.image < b.image;
                         if (a.method != b.method)
                             return static_cast<int>(a.method) < static_cast<int>(b.method);
                         return a.sigma2 < b.sigma2;
                     });
    return report;
}

std::string BenchReport::csv() const {
    std::string out = "# mbdl bench csv schema=1\n";
    if (!config.corpus_note.empty()) out += "# corpus " + config.corpus_note + "\n";
    out +=
        "image,method,sigma2,seed,error_pixels,noisy_error_pixels,bytes,ratio,"
        "lossless,symbols,dict_entries,refine_bits,refine_estimate_bits,"
        "refine_map_estimate_bits\n";
    char buf[320];
    for (const BenchRow& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%s,%s,%.2f,%llu,%llu,%llu,%llu,%.6f,%d,%d,%d,%llu,%.3f,%.3f\n",
                      r.image.c_str(), mode_name(r.method), r.sigma2,
                      static_cast<unsigned long long>(r.noise_seed),
                      static_cast<unsigned long long>(r.error_pixels),
                      static_cast<unsigned long long>(r.noisy_error_pixels),
                      static_cast<unsigned long long>(r.bytes), r.ratio,
                      r.lossless ? 1 : 0, r.symbols, r.dict_entries,
                      static_cast<unsigned long long>(r.refine_bits),
                      r.refine_estimate_bits, r.refine_map_estimate_bits);
        out += buf;
    }
    return out;
}

std::string BenchReport::summary() const {
    struct Agg {
        double e = 0.0, bytes = 0.0, ms = 0.0;
        int n = 0;
    };
    std::map<std::pair<std::string, double>, Agg> agg;  // (method, sigma2)
    for (const BenchRow& r : rows) {
        Agg& a = agg[{mode_name(r.method), r.sigma2}];
        a.e += static_cast<double>(r.error_pixels);
        a.bytes += static_cast<double>(r.bytes);
        a.ms += r.wall_ms;
        ++a.n;
    }
    std::string out = "method          sigma2   mean_e   mean_bytes   mean_ms\n";
    char buf[160];
    for (const auto& [key, a] : agg) {
        std::snprintf(buf, sizeof buf, "%-15s %-8.2f %-8.1f %-12.1f %-8.1f\n",
                      key.first.c_str(), key.second, a.e / a.n, a.bytes / a.n,
                      a.ms / a.n);
        out += buf;
    }
    return out;
}

} // namespace mbdl
