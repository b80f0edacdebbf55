#include "cli.hpp"

#include "hostility/io.hpp"

#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using hostility::testing::TempDir;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "hostility");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = hostility::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Small synthetic corpus shared by the tests below.
const fs::path& small_corpus()
{
    static TempDir dir;
    static const fs::path out = [] {
        const auto cfg = dir.path() / "synth.json";
        hostility::write_file_atomic(cfg, R"({"synth": {"n_posts": 240}})");
        const auto r = run({"synth", "--config", cfg.string(), "--seed", "7", "--out", (dir.path() / "s").string()});
        REQUIRE(r.code == 0);
        return dir.path() / "s";
    }();
    return out;
}

} // namespace

TEST_CASE("exit codes")
{
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"task1", "--help"}).code == 0);
    CHECK(run({"task1", "--no-such-flag"}).code == 1);
    CHECK(run({}).code == 1);

    TempDir dir;
    const auto cfg = dir.path() / "bad.json";
    hostility::write_file_atomic(cfg, R"({"bogus": 1})");
    const auto unknown = run({"stats", "--config", cfg.string(), "--corpus", (small_corpus() / "corpus.jsonl").string(),
                              "--out", (dir.path() / "o").string()});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("bogus") != std::string::npos);

    CHECK(run({"stats", "--corpus", (dir.path() / "missing.jsonl").string(), "--out", (dir.path() / "m").string()})
              .code == 1);
    const auto garbled = dir.path() / "garbled.jsonl";
    hostility::write_file_atomic(garbled, "{not json\n");
    CHECK(run({"stats", "--corpus", garbled.string(), "--out", (dir.path() / "g").string()}).code == 2);

    const auto quiet = dir.path() / "quiet.jsonl";
    hostility::write_file_atomic(
        quiet, R"({"id":"p","author":"a","created_at":0,"comments":[{"id":"c","author":"u","text":"nice photo","t":5,"hostile":false},{"id":"d","author":"v","text":"nice photo","t":9,"hostile":false}]})"
               "\n");
    const auto none = run({"task1", "--corpus", quiet.string(), "--lexicons", (small_corpus() / "lexicons").string(),
                           "--features", "U", "--dim", "4", "--epochs", "1", "--out", (dir.path() / "q").string()});
    CHECK(none.code == 2);
    CHECK_FALSE(fs::exists(dir.path() / "q"));

    // An input inside the output directory would be clobbered.
    const auto inside = run({"stats", "--corpus", (small_corpus() / "corpus.jsonl").string(), "--out",
                             small_corpus().string()});
    CHECK(inside.code == 1);
}

TEST_CASE("synth is reproducible")
{
    TempDir dir;
    const auto a = run({"synth", "--seed", "7", "--out", (dir.path() / "a").string()});
    const auto b = run({"synth", "--seed", "7", "--out", (dir.path() / "b").string()});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out == b.out);
    CHECK(slurp(dir.path() / "a" / "corpus.jsonl") == slurp(dir.path() / "b" / "corpus.jsonl"));
    CHECK(fs::exists(dir.path() / "a" / "manifest.json"));
    CHECK(fs::exists(dir.path() / "a" / "lexicons"));
    CHECK_FALSE(fs::exists(dir.path() / "a.partial"));
}

TEST_CASE("task runs are byte-identical")
{
    TempDir dir;
    const auto corpus = (small_corpus() / "corpus.jsonl").string();
    std::vector<std::string> common = {"task1", "--corpus", corpus, "--lead-hours", "1", "3", "--features", "U",
                                       "U+trend+user", "--dim", "8", "--epochs", "1", "--folds", "5"};
    auto first = common;
    first.insert(first.end(), {"--out", (dir.path() / "r1").string()});
    auto second = common;
    second.insert(second.end(), {"--out", (dir.path() / "r2").string()});
    const auto r1 = run(first);
    INFO(r1.err);
    REQUIRE(r1.code == 0);
    REQUIRE(run(second).code == 0);

    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(dir.path() / "r1")) {
        if (e.path().extension() == ".csv") {
            CHECK(slurp(e.path()) == slurp(dir.path() / "r2" / e.path().filename()));
            ++compared;
        }
    }
    CHECK(compared >= 3);

    // Re-running from the manifest reproduces the reports.
    const auto r3 = run({"task1", "--config", (dir.path() / "r1" / "manifest.json").string(), "--out",
                         (dir.path() / "r3").string()});
    REQUIRE(r3.code == 0);
    CHECK(slurp(dir.path() / "r1" / "report.csv") == slurp(dir.path() / "r3" / "report.csv"));
}

TEST_CASE("cluster writes one file per cluster")
{
    TempDir dir;
    const auto r = run({"cluster", "--corpus", (small_corpus() / "corpus.jsonl").string(), "--k", "4", "--out",
                        (dir.path() / "c").string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    for (int c = 0; c < 4; ++c) {
        CHECK(fs::exists(dir.path() / "c" / ("cluster_" + std::to_string(c) + ".csv")));
    }
    CHECK_FALSE(fs::exists(dir.path() / "c" / "cluster_4.csv"));
    CHECK(fs::exists(dir.path() / "c" / "assignments.csv"));
    CHECK(run({"cluster", "--corpus", (small_corpus() / "corpus.jsonl").string(), "--k", "11", "--out",
               (dir.path() / "d").string()})
              .code == 1);
}
