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

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "mbdl/bench.hpp"
#include "mbdl/codec.hpp"
#include "mbdl/fixture.hpp"
#include "mbdl/forward_model.hpp"
#include "mbdl/pbm.hpp"
#include "mbdl/restoration.hpp"

namespace fs = std::filesystem;
using namespace mbdl;

namespace {

struct CliOptions {
    std::string input;
    std::string input_b;
    std::string out;
    std::string trace_path;
    std::string report_path;
    std::string config_file;
    std::string mode = "mbir-dl";
    std::string corpus_dir;
    double sigma2 = 0.1;
    std::vector<double> bench_sigmas;
    u64 seed = 1;
    int max_iters = 10;
    int filter_size = 3;
    int gen_pages = 0;
    u64 corpus_seed = 42;
    int workers = 0;
};

/// Simple key=value config file; values override the command line. Unknown
/// keys are an error so typos do not silently vanish.
void apply_config_file(CliOptions& opt) {
    if (opt.config_file.empty()) return;
    std::ifstream f(opt.config_file);
    if (!f) throw std::runtime_error("cannot open config file " + opt.config_file);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
        usize start = line.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value");
        const std::string key = line.substr(start, eq - start);
        const std::string value = line.substr(eq + 1);
        if (key == "sigma2") opt.sigma2 = std::stod(value);
        else if (key == "seed") opt.seed = std::stoull(value);
        else if (key == "mode") opt.mode = value;
        else if (key == "max_iters") opt.max_iters = std::stoi(value);
        else if (key == "filter_size") opt.filter_size = std::stoi(value);
        else if (key == "out") opt.out = value;
        else if (key == "workers") opt.workers = std::stoi(value);
        else if (key == "corpus_seed") opt.corpus_seed = std::stoull(value);
        else if (key == "gen_pages") opt.gen_pages = std::stoi(value);
        else
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
    }
}

RestorationConfig restoration_config(const CliOptions& opt) {
    RestorationConfig rc;
    rc.max_outer = opt.max_iters;
    rc.filter_size = opt.filter_size;
    return rc;
}

std::vector<u8> read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const u8> bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

int run_synth(const CliOptions& opt) {
    const BinaryImage clean = load_image(opt.input);
    const LowPassFilter f = build_filter(opt.sigma2, opt.filter_size);
    const BinaryImage noisy = synthesize_noisy(clean, f, opt.seed);
    save_image(noisy, opt.out.empty() ? "noisy.pbm" : opt.out);
    return 0;
}

int run_restore(const CliOptions& opt) {
    const BinaryImage y = load_image(opt.input);
    RestorationConfig rc = restoration_config(opt);
    if (opt.mode == "mbir-mrf") rc.prior = PriorKind::mrf;
    else if (opt.mode != "mbir-dl")
        throw std::runtime_error("restore supports modes mbir-dl and mbir-mrf");
    const RestorationState state = restore(y, rc);
    save_image(state.x, opt.out.empty() ? "restored.pbm" : opt.out);
    if (!opt.trace_path.empty()) write_trace_csv(state.trace, opt.trace_path);
    std::cout << "iterations=" << state.iterations
              << " total_nats=" << state.total_nats << "\n";
    return 0;
}

int run_encode(const CliOptions& opt) {
    const BinaryImage y = load_image(opt.input);
    CompressConfig cc;
    cc.mode = mode_from_name(opt.mode);
    cc.restoration = restoration_config(opt);
    const CompressResult res = compress(y, cc);
    write_file(opt.out.empty() ? "out.mbdl" : opt.out, res.bitstream);
    if (!opt.trace_path.empty()) write_trace_csv(res.report.trace, opt.trace_path);
    if (!opt.report_path.empty()) {
        std::ofstream rf(opt.report_path, std::ios::trunc);
        rf << "mode=" << mode_name(res.report.mode) << "\n"
           << "bytes=" << res.bitstream.size() << "\n"
           << "raw_bytes=" << res.report.raw_bytes << "\n"
           << "ratio=" << res.report.ratio << "\n"
           << "symbols=" << res.report.symbols << "\n"
           << "dict_entries=" << res.report.dict_entries << "\n";
    }
    std::cout << "bytes=" << res.bitstream.size() << " ratio=" << res.report.ratio
              << "\n";
    return 0;
}

int run_decode(const CliOptions& opt) {
    const std::vector<u8> bytes = read_file(opt.input);
    const BinaryImage img = decode(bytes);
    save_image(img, opt.out.empty() ? "decoded.pbm" : opt.out);
    return 0;
}

int run_eval(const CliOptions& opt) {
    const BinaryImage a = load_image(opt.input);
    const BinaryImage b = load_image(opt.input_b);
    std::cout << error_count(a, b).count << "\n";
    return 0;
}

int run_bench(const CliOptions& opt) {
    std::vector<std::pair<std::string, BinaryImage>> corpus;
    const fs::path dir = opt.corpus_dir.empty() ? fs::path("corpus") : fs::path(opt.corpus_dir);
    if (opt.gen_pages > 0) {
        render_fixture_corpus(dir, opt.gen_pages, opt.corpus_seed);
    }
    if (!fs::is_directory(dir))
        throw std::runtime_error("corpus directory not found: " + dir.string() +
                                 " (use --gen-pages to create one)");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".pbm") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& p : files)
        corpus.emplace_back(p.stem().string(), load_image(p));
    if (corpus.empty()) throw std::runtime_error("no .pbm pages in " + dir.string());

    BenchConfig bc;
    if (!opt.bench_sigmas.empty()) bc.sigmas = opt.bench_sigmas;
    bc.seed = opt.seed;
    bc.restoration = restoration_config(opt);
    bc.workers = opt.workers;
    bc.corpus_note = "pages=" + std::to_string(corpus.size()) + " size=" +
                     std::to_string(corpus.front().second.width()) + "x" +
                     std::to_string(corpus.front().second.height());
    const BenchReport report = run_benchmark(corpus, bc);

    const std::string csv = report.csv();
    const fs::path out = opt.out.empty() ? fs::path("bench.csv") : fs::path(opt.out);
    std::ofstream f(out, std::ios::trunc | std::ios::binary);
    f << csv;
    std::cout << report.summary();
    std::cout << "rows=" << report.rows.size() << " csv=" << out.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CliOptions opt;
    CLI::App app{"bilevel document restoration + symbol-dictionary compression"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_file, "key=value file overriding flags");
        sub->add_option("--out", opt.out, "output path");
        sub->add_option("--seed", opt.seed, "rng seed");
    };

    CLI::App* synth = app.add_subcommand("synth", "clean page -> noisy page");
    synth->add_option("input", opt.input, "clean PBM")->required();
    synth->add_option("--sigma2", opt.sigma2, "noise filter variance");
    synth->add_option("--filter-size", opt.filter_size, "noise filter size (odd)");
    add_common(synth);

    CLI::App* rest = app.add_subcommand("restore", "noisy page -> restored page");
    rest->add_option("input", opt.input, "noisy PBM")->required();
    rest->add_option("--mode", opt.mode, "mbir-dl | mbir-mrf");
    rest->add_option("--max-iters", opt.max_iters, "max outer iterations");
    rest->add_option("--trace", opt.trace_path, "cost trace CSV path");
    add_common(rest);

    CLI::App* enc = app.add_subcommand("encode", "page -> bitstream");
    enc->add_option("input", opt.input, "PBM to encode")->required();
    enc->add_option("--mode", opt.mode,
                    "wxor-lossless | cee-lossless | mbir-mrf | mbir-dl");
    enc->add_option("--max-iters", opt.max_iters, "max outer iterations");
    enc->add_option("--trace", opt.trace_path, "cost trace CSV path (mbir modes)");
    enc->add_option("--report", opt.report_path, "write a key=value size report");
    add_common(enc);

    CLI::App* dec = app.add_subcommand("decode", "bitstream -> page");
    dec->add_option("input", opt.input, "bitstream file")->required();
    add_common(dec);

    CLI::App* eval = app.add_subcommand("eval", "count differing pixels");
    eval->add_option("a", opt.input, "first PBM")->required();
    eval->add_option("b", opt.input_b, "second PBM")->required();
    add_common(eval);

    CLI::App* bench = app.add_subcommand("bench", "run the synthetic-noise protocol");
    bench->add_option("--corpus", opt.corpus_dir, "directory of clean PBM pages");
    bench->add_option("--gen-pages", opt.gen_pages,
                      "generate this many fixture pages into --corpus first");
    bench->add_option("--corpus-seed", opt.corpus_seed, "fixture generation seed");
    bench->add_option("--sigma2", opt.bench_sigmas, "noise levels (repeatable)");
    bench->add_option("--max-iters", opt.max_iters, "max outer iterations");
    bench->add_option("--workers", opt.workers, "worker threads (or MBDL_WORKERS)");
    add_common(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors exit 1
    }

    try {
        apply_config_file(opt);
        if (synth->parsed()) return run_synth(opt);
        if (rest->parsed()) return run_restore(opt);
        if (enc->parsed()) return run_encode(opt);
        if (dec->parsed()) return run_decode(opt);
        if (eval->parsed()) return run_eval(opt);
        if (bench->parsed()) return run_bench(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
