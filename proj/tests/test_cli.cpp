#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "qpvi/suites.hpp"

namespace fs = std::filesystem;
using qpvi::suites::Config;
using qpvi::suites::ConfigError;
using qpvi::suites::json;

namespace {

/// Scratch directory removed on scope exit.
struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("qpvi_cli_" + std::to_string(::getpid()) + "_" + std::to_string(rand()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

/// Runs the CLI with QPVI_OUT_DIR pointing at dir; returns the exit status.
int run_cli(const TempDir& dir, const std::string& args) {
    const std::string cmd = "QPVI_OUT_DIR='" + dir.path.string() + "' '" + QPVI_CLI_PATH + "' " + args + " > '" +
                            (dir.path / "stdout.txt").string() + "' 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const TempDir& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir.path / name;
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("verify-theta with defaults passes and writes both files") {
    TempDir d;
    CHECK(run_cli(d, "verify-theta") == 0);
    const auto doc = read_json(d.path / "verify-theta.json");
    CHECK(doc["suite"] == "verify-theta");
    CHECK(doc["pass"] == true);
    for (const auto& c : doc["checks"]) CHECK(c["value"].get<double>() <= c["limit"].get<double>());
    const std::string csv = read_text(d.path / "verify-theta.csv");
    std::string header;
    for (const auto& c : qpvi::suites::csv_columns("verify-theta")) header += (header.empty() ? "" : ",") + c;
    CHECK(csv.rfind(header + "\n", 0) == 0);
}

TEST_CASE("reports are identical for identical seeds apart from timing") {
    TempDir d;
    REQUIRE(run_cli(d, "orbit --seed 17 --trials 5 --out a.json") == 0);
    REQUIRE(run_cli(d, "orbit --seed 17 --trials 5 --out b.json") == 0);
    auto a = read_json(d.path / "a.json"), b = read_json(d.path / "b.json");
    a.erase("timing_seconds");
    b.erase("timing_seconds");
    CHECK(a.dump() == b.dump());
    CHECK(read_text(d.path / "a.csv") == read_text(d.path / "b.csv"));
    REQUIRE(run_cli(d, "orbit --seed 18 --trials 5 --out c.json") == 0);
    auto c = read_json(d.path / "c.json");
    c.erase("timing_seconds");
    CHECK(a.dump() != c.dump());
}

TEST_CASE("resonant parameters fail every trial with a resonance message") {
    TempDir d;
    const auto cfg = write_config(d, "res.json", R"({"trials": 3, "options": {"params": {
        "q": 0.25, "kappa0": [1.1, 0.2], "kappaT": 0.5, "kappa1": [0.9, 0.3],
        "kappaInf": [0.8, -0.5], "t0": [0.7, 0.6]}}})");
    CHECK(run_cli(d, "monodromy --config '" + cfg.string() + "'") == 1);
    const auto doc = read_json(d.path / "monodromy.json");
    CHECK(doc["pass"] == false);
    REQUIRE(doc["trials"].size() == 3);
    for (const auto& t : doc["trials"]) CHECK(t["error"].get<std::string>().find("reson") != std::string::npos);
}

TEST_CASE("malformed configs exit with the usage code") {
    TempDir d;
    CHECK(run_cli(d, "orbit --config '" + write_config(d, "a.json", "{ not json").string() + "'") == 2);
    CHECK(run_cli(d, "orbit --config '" + write_config(d, "b.json", R"({"seeed": 3})").string() + "'") == 2);
    CHECK(run_cli(d, "orbit --config '" + write_config(d, "c.json", R"({"q_magnitude_range": [0.5, 1.5]})").string() + "'") == 2);
    CHECK(run_cli(d, "orbit --config '" + write_config(d, "e.json", R"({"options": {"length": "ten"}})").string() + "'") == 2);
    CHECK(run_cli(d, "orbit --config '" + (d.path / "missing.json").string() + "'") == 2);
    CHECK(run_cli(d, "no-such-command") == 2);
    CHECK(run_cli(d, "") == 2);
}

TEST_CASE("config parsing") {
    const auto c = Config::from_json(json::parse(
        R"({"seed": 5, "trials": 7, "q_magnitude_range": [0.3, 0.4], "tolerances": {"surface": 1e-7}, "options": {"x": 1}})"));
    CHECK(c.seed == 5);
    CHECK(c.trials_or(1) == 7);
    CHECK(c.ranges.q_lo == 0.3);
    CHECK(c.tol("surface", 1.0) == 1e-7);
    CHECK(c.tol("other", 2.0) == 2.0);
    const auto back = Config::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK_THROWS_AS(Config::from_json(json::parse("[1]")), ConfigError);
    CHECK_THROWS_AS(Config::from_json(json::parse(R"({"trials": 0})")), ConfigError);
    CHECK_THROWS_AS(Config::from_json(json::parse(R"({"seed": "x"})")), ConfigError);
    CHECK_THROWS_AS(Config::from_json(json::parse(R"({"kappa_annulus": [2, 1]})")), ConfigError);
    CHECK_THROWS_AS(Config::from_json(json::parse(R"({"tolerances": {"a": -1}})")), ConfigError);
    CHECK_THROWS_AS(Config::from_json(json::parse(R"({"options": {"params": {"q": 2}}})")), ConfigError);
    CHECK_THROWS_AS(qpvi::suites::run("nope", Config{}), ConfigError);
}
