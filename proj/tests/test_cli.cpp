// End-to-end checks of the qot binary: exit codes, printed values, and the
// determinism of everything it writes. The binary path and the fixture
// directory come in as compile definitions.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("qot_cli_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub) const { return (path / sub).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fixture(const std::string& name) { return fs::path(QOT_FIXTURE_DIR) / name; }

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args, const TempDir& dir, const std::string& tag) {
    const fs::path capture = dir.path / ("cli_" + tag + ".txt");
    const std::string cmd =
        std::string(QOT_BIN_PATH) + " " + args + " > " + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult r;
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    r.output = slurp(capture);
    return r;
}

// Value following "key " on its own line of the captured output.
double printed_value(const std::string& output, const std::string& key) {
    std::istringstream in(output);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + " ", 0) == 0)
            return std::strtod(line.c_str() + key.size() + 1, nullptr);
    }
    FAIL("no line starts with '", key, " '");
    return 0.0;
}

}  // namespace

TEST_CASE("solve writes its outputs and prints the exact objective") {
    TempDir dir("solve");
    const auto r = run_cli("solve --config " + fixture("solve_ca.json").string() +
                               " --out-dir " + dir.str("out"),
                           dir, "solve");
    CHECK(r.exit_code == 0);
    CHECK(std::abs(printed_value(r.output, "objective") - 0.875) <= 1e-8);
    CHECK(fs::exists(dir.path / "out" / "potentials.json"));
    CHECK(fs::exists(dir.path / "out" / "coupling.csv"));
    CHECK(fs::exists(dir.path / "out" / "trace.csv"));
}

TEST_CASE("missing input files exit with the configuration code") {
    TempDir dir("missing");
    const auto r = run_cli("solve --config " + fixture("solve_missing_measure.json").string() +
                               " --out-dir " + dir.str("out"),
                           dir, "missing");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("no_such_measure.json") != std::string::npos);
}

TEST_CASE("oversized steps are rejected unless explicitly unsafe") {
    TempDir dir("step");
    const std::string base = "solve --config " + fixture("solve_gd_bigstep.json").string() +
                             " --out-dir " + dir.str("out");
    const auto rejected = run_cli(base, dir, "rejected");
    CHECK(rejected.exit_code == 2);
    CHECK(rejected.output.find("admissible range") != std::string::npos);

    const auto allowed = run_cli(base + " --unsafe-step", dir, "allowed");
    CHECK(allowed.exit_code == 0);
    CHECK(std::abs(printed_value(allowed.output, "objective") - 0.875) <= 1e-8);
}

TEST_CASE("verify passes a clean run and writes its report") {
    TempDir dir("verify");
    const auto r = run_cli("verify --config " + fixture("verify_gd.json").string() +
                               " --out-dir " + dir.str("out"),
                           dir, "verify");
    CHECK(r.exit_code == 0);
    const json report = json::parse(slurp(dir.path / "out" / "report.json"));
    CHECK(report.at("all_pass").get<bool>());
    CHECK(report.at("checks").size() == 6);
    CHECK(fs::exists(dir.path / "out" / "trace.csv"));
}

TEST_CASE("a corrupted reference is surfaced, not silently replaced") {
    TempDir dir("badref");
    const auto r = run_cli("verify --config " + fixture("verify_bad_ref.json").string() +
                               " --out-dir " + dir.str("out"),
                           dir, "badref");
    CHECK(r.exit_code == 4);
    CHECK(r.output.find("ReferenceNotOptimal") != std::string::npos);
    // The report is still written, with the certificate failure on record.
    const json report = json::parse(slurp(dir.path / "out" / "report.json"));
    CHECK_FALSE(report.at("all_pass").get<bool>());
    CHECK(report.at("checks").size() == 1);
    CHECK(report.at("checks")[0].at("name").get<std::string>() == "reference_certified");
}

TEST_CASE("constants prints the certified values as JSON") {
    TempDir dir("constants");
    const auto r = run_cli("constants --config " + fixture("constants_ones.json").string(),
                           dir, "constants");
    CHECK(r.exit_code == 0);
    const json c = json::parse(r.output);
    CHECK(c.at("gamma_eps").get<double>() == 16.0);
    CHECK(c.at("beta_eps").get<double>() == 0.25);
    CHECK(c.at("variant").get<std::string>() == "lipschitz");

    const auto missing = run_cli("constants --config " + fixture("constants_ones.json").string() +
                                     " --variant connected",
                                 dir, "missing_comega");
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("C_Omega") != std::string::npos);
}

TEST_CASE("compare requires at least two algorithms and tabulates the gaps") {
    TempDir dir("compare");
    const auto single = run_cli("compare --config " + fixture("compare_single.json").string() +
                                    " --out-dir " + dir.str("out_single"),
                                dir, "single");
    CHECK(single.exit_code == 2);

    const auto three = run_cli("compare --config " + fixture("compare_three.json").string() +
                                   " --out-dir " + dir.str("out_three"),
                               dir, "three");
    CHECK(three.exit_code == 0);
    const std::string csv = slurp(dir.path / "out_three" / "compare.csv");
    CHECK(csv.rfind("iter,gap_gradient_ascent,gap_coordinate_ascent,gap_coordinate_gradient_ascent\n",
                    0) == 0);
    CHECK(three.output.find("empirical_contraction") != std::string::npos);
    CHECK(three.output.find("theoretical_contraction") != std::string::npos);
}

TEST_CASE("oracle reports the exact small-instance solution") {
    TempDir dir("oracle");
    const auto r = run_cli("oracle --config " + fixture("oracle_two_by_two.json").string() +
                               " --out-dir " + dir.str("out"),
                           dir, "oracle");
    CHECK(r.exit_code == 0);
    const json summary = json::parse(r.output);
    CHECK(std::abs(summary.at("value").get<double>() - 0.875) <= 1e-10);
    CHECK(summary.at("kkt_residual").get<double>() <= 1e-11);
    CHECK(fs::exists(dir.path / "out" / "oracle_coupling.csv"));
}

TEST_CASE("repeated runs produce byte-identical files") {
    TempDir dir("determinism");
    for (const char* name : {"a", "b"}) {
        const auto r = run_cli("solve --config " + fixture("solve_ca.json").string() +
                                   " --out-dir " + dir.str(std::string("solve_") + name),
                               dir, std::string("solve_") + name);
        REQUIRE(r.exit_code == 0);
        const auto v = run_cli("verify --config " + fixture("verify_gauss.json").string() +
                                   " --out-dir " + dir.str(std::string("verify_") + name),
                               dir, std::string("verify_") + name);
        REQUIRE(v.exit_code == 0);
    }
    for (const char* file : {"potentials.json", "coupling.csv", "trace.csv"})
        CHECK(slurp(dir.path / "solve_a" / file) == slurp(dir.path / "solve_b" / file));
    for (const char* file : {"report.json", "trace.csv"})
        CHECK(slurp(dir.path / "verify_a" / file) == slurp(dir.path / "verify_b" / file));
}
