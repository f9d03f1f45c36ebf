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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "mbdl/fixture.hpp"
#include "mbdl/pbm.hpp"

using namespace mbdl;
namespace fs = std::filesystem;

namespace {

const fs::path kCli = MBDL_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "mbdl_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
    const std::string cmd = kCli.string() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::vector<u8> slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("cli round trip: synth, encode, decode, eval") {
    TempDir tmp;
    FixturePageConfig small;
    small.width = 256;
    small.height = 192;
    const fs::path clean = tmp.path / "clean.pbm";
    save_image(render_fixture_page(500, small), clean);

    SUBCASE("eval of an image against itself prints zero and exits zero") {
        CHECK(run("eval " + clean.string() + " " + clean.string()) == 0);
    }
    SUBCASE("synth is deterministic for a fixed seed") {
        const fs::path n1 = tmp.path / "n1.pbm", n2 = tmp.path / "n2.pbm";
        CHECK(run("synth " + clean.string() + " --sigma2 0.1 --seed 7 --out " +
                  n1.string()) == 0);
        CHECK(run("synth " + clean.string() + " --sigma2 0.1 --seed 7 --out " +
                  n2.string()) == 0);
        CHECK(slurp(n1) == slurp(n2));
        const fs::path n3 = tmp.path / "n3.pbm";
        CHECK(run("synth " + clean.string() + " --sigma2 0.1 --seed 8 --out " +
                  n3.string()) == 0);
        CHECK(slurp(n1) != slurp(n3));
    }
    SUBCASE("encode then decode reproduces the page byte for byte") {
        const fs::path bs = tmp.path / "page.mbdl";
        const fs::path back = tmp.path / "back.pbm";
        CHECK(run("encode " + clean.string() + " --mode cee-lossless --out " +
                  bs.string()) == 0);
        CHECK(run("decode " + bs.string() + " --out " + back.string()) == 0);
        CHECK(slurp(clean) == slurp(back));
    }
    SUBCASE("restore writes a page and a trace") {
        const fs::path noisy = tmp.path / "noisy.pbm";
        REQUIRE(run("synth " + clean.string() + " --sigma2 0.1 --seed 3 --out " +
                    noisy.string()) == 0);
        const fs::path restored = tmp.path / "restored.pbm";
        const fs::path trace = tmp.path / "trace.csv";
        CHECK(run("restore " + noisy.string() + " --max-iters 3 --out " +
                  restored.string() + " --trace " + trace.string()) == 0);
        CHECK(fs::exists(restored));
        std::ifstream tf(trace);
        std::string header;
        std::getline(tf, header);
        CHECK(header.find("total_nats") != std::string::npos);
    }
    SUBCASE("config file overrides flags") {
        const fs::path conf = tmp.path / "conf.txt";
        std::ofstream(conf) << "seed=7\n";
        const fs::path n1 = tmp.path / "c1.pbm", n2 = tmp.path / "c2.pbm";
        CHECK(run("synth " + clean.string() + " --seed 1 --config " + conf.string() +
                  " --out " + n1.string()) == 0);
        CHECK(run("synth " + clean.string() + " --seed 7 --out " + n2.string()) == 0);
        CHECK(slurp(n1) == slurp(n2));
    }
}

TEST_CASE("cli exit codes distinguish usage and data errors") {
    TempDir tmp;
    CHECK(run("bogus-subcommand") == 1);
    CHECK(run("eval") == 1);                       // missing arguments
    CHECK(run("synth --no-such-flag x.pbm") == 1); // unknown flag
    CHECK(run("decode " + (tmp.path / "missing.bin").string()) == 2);
    CHECK(run("eval " + (tmp.path / "a.pbm").string() + " " +
              (tmp.path / "b.pbm").string()) == 2);

    const fs::path bad = tmp.path / "bad.mbdl";
    std::ofstream(bad) << "not a bitstream";
    CHECK(run("decode " + bad.string()) == 2);

    const fs::path clean = tmp.path / "clean.pbm";
    FixturePageConfig small;
    small.width = 128;
    small.height = 96;
    save_image(render_fixture_page(501, small), clean);
    CHECK(run("encode " + clean.string() + " --mode no-such-mode") == 2);
}

TEST_CASE("cli bench writes a deterministic csv") {
    TempDir tmp;
    const fs::path corpus = tmp.path / "corpus";
    const fs::path csv1 = tmp.path / "r1.csv";
    const fs::path csv2 = tmp.path / "r2.csv";
    const std::string base = "bench --corpus " + corpus.string() +
                             " --gen-pages 1 --corpus-seed 5 --sigma2 0.1 "
                             "--max-iters 2 --seed 9 --out ";
    CHECK(run(base + csv1.string()) == 0);
    CHECK(run(base + csv2.string()) == 0);
    CHECK(slurp(csv1) == slurp(csv2));
    std::ifstream f(csv1);
    std::string line;
    std::getline(f, line);
    CHECK(line.find("schema=1") != std::string::npos);
}
