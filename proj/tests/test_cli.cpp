#include <catch2/catch_amalgamated.hpp>

#include "channelwave/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace channelwave;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("channelwave_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

constexpr const char* kMinimalConfig =
    "protocol = main\n"
    "adversary = burst\n"
    "adversary.n = 16\n"
    "horizon = 4096\n"
    "seed = 1\n";

} // namespace

TEST_CASE("run writes trace and metrics and is reproducible") {
    TempDir tmp;
    write(tmp.path / "run.cfg", kMinimalConfig);
    std::ostringstream out, err;

    const fs::path out_a = tmp.path / "a";
    const fs::path out_b = tmp.path / "b";
    CHECK(cli::cmd_run((tmp.path / "run.cfg").string(), out_a.string(), out, err) == 0);
    CHECK(cli::cmd_run((tmp.path / "run.cfg").string(), out_b.string(), out, err) == 0);
    REQUIRE(fs::exists(out_a / "trace.csv"));
    REQUIRE(fs::exists(out_a / "metrics.json"));
    CHECK(slurp(out_a / "trace.csv") == slurp(out_b / "trace.csv"));
    CHECK(slurp(out_a / "metrics.json") == slurp(out_b / "metrics.json"));
    CHECK(slurp(out_a / "trace.csv").rfind("# schema: channelwave.trace.v1", 0) == 0);
}

TEST_CASE("malformed config exits 2 with no partial output") {
    TempDir tmp;
    write(tmp.path / "bad.cfg", "horizon = banana\n");
    std::ostringstream out, err;
    const fs::path out_dir = tmp.path / "never";
    CHECK(cli::cmd_run((tmp.path / "bad.cfg").string(), out_dir.string(), out, err) == 2);
    CHECK_FALSE(fs::exists(out_dir));
    CHECK(err.str().find("line 1") != std::string::npos);

    CHECK(cli::cmd_run((tmp.path / "missing.cfg").string(), out_dir.string(), out, err) == 2);
}

TEST_CASE("environment seed overrides the config seed") {
    TempDir tmp;
    write(tmp.path / "a.cfg", kMinimalConfig);
    write(tmp.path / "b.cfg",
          "protocol = main\nadversary = burst\nadversary.n = 16\nhorizon = 4096\nseed = 999\n");
    std::ostringstream out, err;
    ::setenv("CHANNELWAVE_SEED", "424242", 1);
    cli::cmd_run((tmp.path / "a.cfg").string(), (tmp.path / "ea").string(), out, err);
    cli::cmd_run((tmp.path / "b.cfg").string(), (tmp.path / "eb").string(), out, err);
    ::unsetenv("CHANNELWAVE_SEED");
    CHECK(slurp(tmp.path / "ea" / "trace.csv") == slurp(tmp.path / "eb" / "trace.csv"));
}

TEST_CASE("sweep emits one row per run") {
    TempDir tmp;
    write(tmp.path / "sweep.cfg",
          "name = tiny\nprotocol = main\nadversary = burst\nadversary.n = 16\n"
          "horizon = 1024\nseed = 1\nsweep.n = 64,128\nsweep.seeds = 3\n");
    std::ostringstream out, err;
    CHECK(cli::cmd_sweep((tmp.path / "sweep.cfg").string(), (tmp.path / "out").string(), 0, 2,
                         out, err) == 0);
    const std::string csv = slurp(tmp.path / "out" / "sweep.csv");
    CHECK(csv.rfind("# schema: channelwave.sweep.v1", 0) == 0);
    std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
    CHECK(rows == 2 + 6); // schema + header + 2 sizes x 3 seeds
}

TEST_CASE("verify rejects unknown suites") {
    std::ostringstream out, err;
    VerifyOptions opts;
    CHECK(cli::cmd_verify("nonsense", opts, out, err) == 2);
    CHECK(err.str().find("known suites") != std::string::npos);
}

TEST_CASE("verify runs an underpowered suite with a warning") {
    std::ostringstream out, err;
    VerifyOptions opts;
    opts.seeds = 1;
    opts.parallelism = 2;
    CHECK(cli::cmd_verify("first-success", opts, out, err) != 2);
    CHECK(out.str().find("underpowered") != std::string::npos);
    CHECK(out.str().find("first-success") != std::string::npos);
}

TEST_CASE("compare validates its inputs and emits the fixed schema") {
    std::ostringstream out, err;
    CHECK(cli::cmd_compare({}, {256}, 2, "unused", "", 2, out, err) == 2);

    TempDir tmp;
    CHECK(cli::cmd_compare({"main", "exp"}, {64, 128}, 2, (tmp.path / "cmp").string(), "", 2,
                           out, err) == 0);
    const std::string csv = slurp(tmp.path / "cmp" / "compare.csv");
    CHECK(csv.rfind("# schema: channelwave.compare.v1", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 2 * 2 * 2);
    CHECK(csv.find("main,64,") != std::string::npos);
    CHECK(csv.find("exp,128,") != std::string::npos);

    CHECK(cli::cmd_compare({"quantum"}, {64}, 1, (tmp.path / "x").string(), "", 2, out, err) == 2);
}
