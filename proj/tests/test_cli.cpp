#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <sstream>
#include <string>

#include "wdro/cli.hpp"
#include "wdro/io.hpp"

using namespace wdro;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

CliRun cli(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"wdro"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());
    std::ostringstream out, err;
    CliRun run;
    run.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    run.out = out.str();
    run.err = err.str();
    return run;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("wdro_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("missing config file fails validation") {
    const CliRun r = cli({"eval", "--config", "/nonexistent/missing.json"});
    CHECK(r.code == 1);
    CHECK(r.err.find("\"error\"") != std::string::npos);
}

TEST_CASE("calibrate from flags reproduces the worked radius") {
    const CliRun r = cli({"calibrate", "--rule", "cor4", "--n", "100", "--t", "1", "--tau", "1",
                          "--r-star", "0.01"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["result"]["rho_n"].get<double>() == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(doc["result"]["eps_n"].get<double>() == doctest::Approx(0.06).epsilon(1e-15));
    CHECK(doc["config"]["rule"] == "cor4");
}

TEST_CASE("calibrate surfaces numerical failures with exit code 2") {
    const CliRun r = cli({"calibrate", "--rule", "cor3", "--n", "5", "--t", "1", "--tau", "1",
                          "--sigma", "1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("MinSampleSize") != std::string::npos);
}

TEST_CASE("eval evaluates the symmetric quadratic instance") {
    const fs::path dir = fresh_dir("eval");
    const std::string cfg = R"({
  "schema_version": 1,
  "distribution": {"atoms": [[-1.0], [1.0]], "weights": [0.5, 0.5]},
  "loss": {"family": "quadratic", "theta": [1.0]},
  "rho": 1.0,
  "p": 2,
  "domain": {"kind": "unbounded"}
})";
    write_text_file((dir / "cfg.json").string(), cfg);
    const CliRun r = cli({"eval", "--config", (dir / "cfg.json").string()});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["result"]["robust_loss"].get<double>() == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(doc["result"]["lambda_opt"].get<double>() == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("unknown config keys are rejected") {
    const fs::path dir = fresh_dir("badkey");
    write_text_file((dir / "cfg.json").string(),
                    R"({"schema_version": 1, "rule": "thm1", "n": 10, "bogus": 3})");
    const CliRun r = cli({"calibrate", "--config", (dir / "cfg.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("bogus") != std::string::npos);
}

TEST_CASE("schema version is mandatory") {
    const fs::path dir = fresh_dir("schema");
    write_text_file((dir / "cfg.json").string(), R"({"rule": "thm1", "n": 10})");
    const CliRun r = cli({"calibrate", "--config", (dir / "cfg.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("schema_version") != std::string::npos);
}

TEST_CASE("csv ingestion reports the offending row") {
    const fs::path dir = fresh_dir("csv");
    write_text_file((dir / "data.csv").string(), "x,y\n1.0,2.0\nnan,3.0\n");
    write_text_file((dir / "cfg.json").string(),
                    std::string(R"({"schema_version": 1, "problem": "newsvendor", "data_csv": ")") +
                        (dir / "data.csv").string() + R"(", "rho": 0.1})");
    const CliRun r = cli({"solve", "--config", (dir / "cfg.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find(":3:") != std::string::npos);  // header is line 1
}

TEST_CASE("solve runs a newsvendor instance from csv") {
    const fs::path dir = fresh_dir("solve");
    write_text_file((dir / "data.csv").string(), "x,y\n1.0,1.0\n2.0,2.1\n0.5,0.4\n");
    write_text_file((dir / "cfg.json").string(),
                    std::string(R"({"schema_version": 1, "problem": "newsvendor", "data_csv": ")") +
                        (dir / "data.csv").string() +
                        R"(", "rho": 0.05, "h": 1.0, "b": 2.0, "B": 4.0})");
    const CliRun r = cli({"solve", "--config", (dir / "cfg.json").string()});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["result"]["converged"].get<bool>());
    CHECK(doc["result"]["robust_objective"].get<double>() >=
          doc["result"]["nominal_objective"].get<double>() - 1e-12);
}

TEST_CASE("certify writes byte-identical reports for a fixed seed") {
    const fs::path dir_a = fresh_dir("cert_a");
    const fs::path dir_b = fresh_dir("cert_b");
    const fs::path cfg_dir = fresh_dir("cert_cfg");
    const std::string cfg = R"({
  "schema_version": 1,
  "mode": "coverage",
  "problem": "fixed_loss",
  "generator": {"kind": "finite_discrete", "atoms": [[0.0], [1.0]], "weights": [0.5, 0.5]},
  "rule": "thm1",
  "fixed_theta": [1.0],
  "n": 15,
  "replications": 80,
  "t": 2.0
})";
    write_text_file((cfg_dir / "cfg.json").string(), cfg);
    const CliRun a = cli({"certify", "--config", (cfg_dir / "cfg.json").string(), "--out",
                          dir_a.string(), "--seed", "7", "--format", "both"});
    REQUIRE(a.code == 0);
    const CliRun b = cli({"certify", "--config", (cfg_dir / "cfg.json").string(), "--out",
                          dir_b.string(), "--seed", "7", "--format", "both"});
    REQUIRE(b.code == 0);
    CHECK(read_text_file((dir_a / "report.json").string()) ==
          read_text_file((dir_b / "report.json").string()));
    CHECK(read_text_file((dir_a / "coverage.csv").string()) ==
          read_text_file((dir_b / "coverage.csv").string()));

    // a different seed must change the report
    const fs::path dir_c = fresh_dir("cert_c");
    const CliRun c = cli({"certify", "--config", (cfg_dir / "cfg.json").string(), "--out",
                          dir_c.string(), "--seed", "8", "--format", "both"});
    REQUIRE(c.code == 0);
    CHECK(read_text_file((dir_a / "report.json").string()) !=
          read_text_file((dir_c / "report.json").string()));
}

TEST_CASE("outputs are protected unless forced") {
    const fs::path dir = fresh_dir("force");
    const fs::path cfg_dir = fresh_dir("force_cfg");
    write_text_file((cfg_dir / "cfg.json").string(), R"({
  "schema_version": 1, "mode": "coverage", "problem": "fixed_loss",
  "generator": {"kind": "finite_discrete", "atoms": [[0.0], [1.0]], "weights": [0.5, 0.5]},
  "fixed_theta": [1.0], "n": 5, "replications": 10, "t": 1.0
})");
    const CliRun first = cli({"certify", "--config", (cfg_dir / "cfg.json").string(), "--out",
                              dir.string(), "--seed", "1"});
    REQUIRE(first.code == 0);
    const CliRun second = cli({"certify", "--config", (cfg_dir / "cfg.json").string(), "--out",
                               dir.string(), "--seed", "1"});
    CHECK(second.code == 1);
    CHECK(second.err.find("force") != std::string::npos);
    const CliRun third = cli({"certify", "--config", (cfg_dir / "cfg.json").string(), "--out",
                              dir.string(), "--seed", "1", "--force"});
    CHECK(third.code == 0);
}

TEST_CASE("environment seed takes precedence") {
    const fs::path cfg_dir = fresh_dir("env_cfg");
    write_text_file((cfg_dir / "cfg.json").string(), R"({
  "schema_version": 1, "mode": "coverage", "problem": "fixed_loss",
  "generator": {"kind": "finite_discrete", "atoms": [[0.0], [1.0]], "weights": [0.5, 0.5]},
  "fixed_theta": [1.0], "n": 8, "replications": 20, "t": 1.0
})");
    const fs::path dir_a = fresh_dir("env_a");
    const fs::path dir_b = fresh_dir("env_b");
    setenv("WDRO_SEED", "99", 1);
    const CliRun a = cli({"certify", "--config", (cfg_dir / "cfg.json").string(), "--out",
                          dir_a.string(), "--seed", "1"});
    unsetenv("WDRO_SEED");
    const CliRun b = cli({"certify", "--config", (cfg_dir / "cfg.json").string(), "--out",
                          dir_b.string(), "--seed", "99"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(read_text_file((dir_a / "report.json").string()) ==
          read_text_file((dir_b / "report.json").string()));
}

TEST_CASE("rate-function emits the tabulated inverse") {
    const fs::path dir = fresh_dir("rate");
    const fs::path cfg_dir = fresh_dir("rate_cfg");
    write_text_file((cfg_dir / "cfg.json").string(), R"({
  "schema_version": 1,
  "distribution": {"atoms": [[0.0], [1.0]], "weights": [0.5, 0.5]},
  "loss": {"family": "linear", "theta": [1.0]},
  "p": 1,
  "eps_grid": [0.0, 0.3, 0.5, 0.6]
})");
    const CliRun r = cli({"rate-function", "--config", (cfg_dir / "cfg.json").string(), "--out",
                          dir.string(), "--format", "both"});
    REQUIRE(r.code == 0);
    // the csv may carry an explicit inf row, so inspect it as text
    const std::string csv = read_text_file((dir / "rate_function.csv").string());
    CHECK(csv.find("inf") != std::string::npos);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    std::getline(lines, line);
    std::getline(lines, line);  // eps = 0.3
    const std::size_t comma = line.find(',');
    CHECK(std::stod(line.substr(0, comma)) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(std::stod(line.substr(comma + 1)) == doctest::Approx(0.3).epsilon(1e-9));

    const json doc = json::parse(read_text_file((dir / "rate_function.json").string()));
    CHECK(doc["rate_function"][3]["infinite"].get<bool>());
    CHECK(doc["rate_function"][2]["rate"].get<double>() == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("distributions load from weighted csv") {
    const fs::path dir = fresh_dir("dist_csv");
    write_text_file((dir / "dist.csv").string(), "x,weight\n-1.0,0.5\n1.0,0.5\n");
    write_text_file((dir / "cfg.json").string(),
                    std::string(R"({"schema_version": 1,
  "distribution": {"csv": ")") + (dir / "dist.csv").string() + R"("},
  "loss": {"family": "quadratic", "theta": [1.0]},
  "rho": 1.0, "p": 2})");
    const CliRun r = cli({"eval", "--config", (dir / "cfg.json").string()});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["result"]["robust_loss"].get<double>() == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(doc["config"]["loss_family"] == "quadratic");
}

TEST_CASE("usage errors and help") {
    const CliRun bad = cli({"frobnicate"});
    CHECK(bad.code == 1);
    const CliRun help = cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("calibrate") != std::string::npos);
}
