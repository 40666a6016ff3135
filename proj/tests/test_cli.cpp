// End-to-end checks of the command-line tool: pipeline plumbing, exit codes,
// machine-readable errors, byte-reproducible outputs.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kBin = NEARMISS_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("nearmiss_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const fs::path& cwd) {
    const std::string cmd = "cd " + cwd.string() + " && " + kBin + " " + args +
                            " >> cli_stdout.log 2>> cli_stderr.log";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("run -> forecast -> clip -> fuzz pipeline") {
    TempDir tmp;
    CHECK(run_cli("scenario emit crossing_ahead/v0 --out s.json", tmp.path) == 0);
    CHECK(run_cli("run --scenario s.json --out-dir . --name t", tmp.path) == 0);
    CHECK(fs::exists(tmp.path / "t.csv"));
    CHECK(fs::exists(tmp.path / "t.outcome.json"));
    CHECK(run_cli("forecast --trace t.csv --out rps.json", tmp.path) == 0);
    CHECK(run_cli("clip --scenario s.json --trace t.csv --risky-points rps.json "
                  "--rp-index 0 --o-b 5 --o-a 5 --out clip.json",
                  tmp.path) == 0);
    CHECK(run_cli("fuzz --clip clip.json --children 4 --seed 1 --out-dir fz", tmp.path) == 0);
    CHECK(fs::exists(tmp.path / "fz" / "children.csv"));
    CHECK(fs::exists(tmp.path / "fz" / "child_3.json"));
}

TEST_CASE("forecast on a collision trace exits nonzero with an error record") {
    TempDir tmp;
    CHECK(run_cli("scenario emit crossing_ahead/v0 --forced-gap 0 --out bad.json",
                  tmp.path) == 0);
    CHECK(run_cli("run --scenario bad.json --out-dir . --name bad", tmp.path) == 0);
    const int rc = run_cli("forecast --trace bad.csv --out rps.json", tmp.path);
    CHECK(rc == 3);
    const std::string err = slurp(tmp.path / "cli_stderr.log");
    CHECK(err.find("\"error\":\"not_failure_free\"") != std::string::npos);
}

TEST_CASE("bad inputs exit with code 2") {
    TempDir tmp;
    CHECK(run_cli("run --scenario missing.json", tmp.path) == 2);
    CHECK(run_cli("scenario emit nonsense/v0 --out x.json", tmp.path) == 2);
    CHECK(run_cli("bogus-subcommand", tmp.path) == 2);

    // Variant out of range.
    CHECK(run_cli("scenario emit crossing_ahead/v9 --out x.json", tmp.path) == 2);
    const std::string err = slurp(tmp.path / "cli_stderr.log");
    CHECK(err.find("unknown_variant") != std::string::npos);
}

TEST_CASE("equal inputs and seed give byte-identical outputs") {
    TempDir tmp;
    fs::create_directories(tmp.path / "a");
    fs::create_directories(tmp.path / "b");
    CHECK(run_cli("scenario emit unprotected_left/v1 --seed 9 --out a/s.json", tmp.path) == 0);
    CHECK(run_cli("scenario emit unprotected_left/v1 --seed 9 --out b/s.json", tmp.path) == 0);
    CHECK(slurp(tmp.path / "a/s.json") == slurp(tmp.path / "b/s.json"));

    CHECK(run_cli("run --scenario a/s.json --out-dir a --name t", tmp.path) == 0);
    CHECK(run_cli("run --scenario b/s.json --out-dir b --name t", tmp.path) == 0);
    CHECK(slurp(tmp.path / "a/t.csv") == slurp(tmp.path / "b/t.csv"));
    CHECK(slurp(tmp.path / "a/t.outcome.json") == slurp(tmp.path / "b/t.outcome.json"));
}

TEST_CASE("small campaign produces the full report set") {
    TempDir tmp;
    CHECK(run_cli("suite --out-dir suite", tmp.path) == 0);
    // Trim the suite to three seeds to keep this test snappy.
    {
        std::ofstream out(tmp.path / "suite" / "small.json");
        out << "{\"scenarios\": [\"scenarios/crossing_ahead_v0.json\","
               "\"scenarios/red_light_runner_v1.json\","
               "\"scenarios/unprotected_left_v2.json\"]}\n";
    }
    CHECK(run_cli("campaign --suite suite/small.json --strategy forecast "
                  "--repetitions 1 --children 4 --out-dir camp --jobs 2",
                  tmp.path) == 0);
    CHECK(fs::exists(tmp.path / "camp" / "report.json"));
    CHECK(fs::exists(tmp.path / "camp" / "executions.csv"));
    CHECK(fs::exists(tmp.path / "camp" / "curve.csv"));
    CHECK(fs::exists(tmp.path / "camp" / "curve.svg"));
    const std::string report = slurp(tmp.path / "camp" / "report.json");
    CHECK(report.find("\"strategy\": \"forecast\"") != std::string::npos);
}
