#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bloch/runner.hpp"

using namespace bloch;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("bloch_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BLOCH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config parsing accepts a minimal run and applies defaults") {
  const auto j = Json::parse(R"({
    "task": "dispersion",
    "lattice": {"dim": 1, "period": 1.0, "nmax": 8, "grid_size": 64},
    "potential": {"kind": "mathieu", "a": 2.0}
  })");
  const auto cfg = parse_config_json(j);
  CHECK(cfg.task == "dispersion");
  CHECK(cfg.seed == 12345);
  CHECK(cfg.output_dir == "out");
  const auto lat = cfg.lattice.make();
  const auto U = cfg.potential.make(lat);
  CHECK(std::abs(U.coeff(1) - 1.0) < 1e-14);
}

TEST_CASE("config rejects unknown keys and mismatched blocks") {
  CHECK_THROWS_AS(parse_config_json(Json::parse(
                      R"({"task": "dispersion",
                          "lattice": {"dim": 1, "nmax": 4, "grid_size": 32},
                          "potential": {"kind": "zero"},
                          "typo": 1})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_json(Json::parse(
                      R"({"task": "dispersion",
                          "lattice": {"dim": 1, "nmax": 4, "grid_size": 32, "bogus": 2},
                          "potential": {"kind": "zero"}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_json(Json::parse(
                      R"({"task": "dispersion",
                          "lattice": {"dim": 1, "nmax": 4, "grid_size": 32},
                          "potential": {"kind": "zero"},
                          "willmore": {}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_json(Json::parse(
                      R"({"task": "nonsense",
                          "lattice": {"dim": 1, "nmax": 4, "grid_size": 32},
                          "potential": {"kind": "zero"}})")),
                  ConfigError);
}

TEST_CASE("fourier potential from explicit coefficients") {
  const auto j = Json::parse(R"({
    "task": "willmore",
    "lattice": {"dim": 2, "e1": [1,0], "e2": [0,1], "nmax": 4, "grid_size": 32},
    "potential": {"kind": "fourier",
                  "coeffs": [{"n": [0,0], "re": 1.0},
                             {"n": [0,1], "re": 0.15},
                             {"n": [0,-1], "re": 0.15}]}
  })");
  const auto cfg = parse_config_json(j);
  const auto lat = cfg.lattice.make();
  const auto U = cfg.potential.make(lat);
  CHECK(std::abs(U.coeff(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(U.coeff(0, 1) - 0.15) < 1e-14);
  CHECK(U.real_flag());
}

TEST_CASE("cli: malformed config exits 2 without artifacts") {
  const auto dir = temp_dir("malformed");
  const auto cfg = dir / "bad.json";
  write_file(cfg, "{ not json");
  const auto out = dir / "out";
  CHECK(run_cli("run " + cfg.string() + " --output " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out / "summary.json"));

  write_file(cfg, R"({"task": "dispersion",
                      "lattice": {"dim": 1, "nmax": 4, "grid_size": 32},
                      "potential": {"kind": "zero"}, "oops": true})");
  CHECK(run_cli("run " + cfg.string() + " --output " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out / "summary.json"));
}

TEST_CASE("cli: free dispersion run produces a deterministic csv") {
  const auto dir = temp_dir("dispersion");
  const auto cfg = dir / "run.json";
  write_file(cfg, R"({
    "task": "dispersion",
    "lattice": {"dim": 1, "period": 1.0, "nmax": 6, "grid_size": 32},
    "potential": {"kind": "zero"},
    "dispersion": {"samples": 16, "bands": 3},
    "seed": 7
  })");
  const auto out = dir / "out";
  REQUIRE(run_cli("run " + cfg.string() + " --output " + out.string() +
                  " --threads 1") == 0);
  const std::string csv = read_file(out / "dispersion.csv");
  CHECK(csv.rfind("kappa_1,kappa_2,band,energy\n", 0) == 0);
  const size_t rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  CHECK(rows == 16 * 3);
  // repeat run is bit-identical
  const auto out2 = dir / "out2";
  REQUIRE(run_cli("run " + cfg.string() + " --output " + out2.string() +
                  " --threads 1") == 0);
  CHECK(read_file(out2 / "dispersion.csv") == csv);
  // summary carries the pinned metadata keys
  const auto summary = Json::parse(read_file(out / "summary.json"));
  for (const char* key :
       {"task", "conventions_version", "epsilon", "nmax", "grid_size",
        "c0_fitted", "c0_integral", "willmore_direct", "willmore_geometric",
        "periods", "tolerances", "failures"})
    CHECK(summary.contains(key));
  CHECK(summary["epsilon"].get<double>() == 1.0);
}

TEST_CASE("cli: multithreaded sweep matches single-threaded output") {
  const auto dir = temp_dir("threads");
  const auto cfg = dir / "run.json";
  write_file(cfg, R"({
    "task": "dispersion",
    "lattice": {"dim": 1, "period": 1.0, "nmax": 8, "grid_size": 64},
    "potential": {"kind": "mathieu", "a": 2.0},
    "dispersion": {"samples": 12, "bands": 4}
  })");
  const auto out1 = dir / "t1";
  const auto out4 = dir / "t4";
  REQUIRE(run_cli("run " + cfg.string() + " --output " + out1.string() +
                  " --threads 1") == 0);
  REQUIRE(run_cli("run " + cfg.string() + " --output " + out4.string() +
                  " --threads 4") == 0);
  CHECK(read_file(out1 / "dispersion.csv") == read_file(out4 / "dispersion.csv"));
}

TEST_CASE("cli: constant-potential dirac curve writes the pinned header and summary") {
  const auto dir = temp_dir("curve");
  const auto cfg = dir / "run.json";
  write_file(cfg, R"({
    "task": "dirac-curve",
    "lattice": {"dim": 2, "e1": [1,0], "e2": [0,1], "nmax": 3, "grid_size": 16},
    "potential": {"kind": "constant", "c": 1.0},
    "dirac-curve": {"branch": "+", "steps": 8, "kernels": false}
  })");
  const auto out = dir / "out";
  REQUIRE(run_cli("run " + cfg.string() + " --output " + out.string()) == 0);
  const std::string csv = read_file(out / "curve.csv");
  CHECK(csv.rfind("lambda_re,lambda_im,k1_re,k1_im,k2_re,k2_im,det_log10,"
                  "mu1_re,mu1_im,mu2_re,mu2_im,branch\n",
                  0) == 0);
  const auto summary = Json::parse(read_file(out / "summary.json"));
  REQUIRE(summary["c0_fitted"].is_array());
  const double c0 = summary["c0_fitted"][0].get<double>();
  CHECK(std::abs(c0 - (-1.0)) < 1e-6);
  const double c0i = summary["c0_integral"][0].get<double>();
  CHECK(std::abs(c0i - (-1.0)) < 1e-12);
}

TEST_CASE("cli: verify suite passes on mathieu and fails on deliberate under-resolution") {
  const auto dir = temp_dir("verify");
  const auto good = dir / "good.json";
  write_file(good, R"({
    "task": "dispersion",
    "lattice": {"dim": 1, "period": 1.0, "nmax": 16, "grid_size": 128},
    "potential": {"kind": "mathieu", "a": 2.0},
    "verify": {"draws": 2}
  })");
  CHECK(run_cli("verify " + good.string() + " --output " +
                (dir / "vgood").string()) == 0);
  const auto report = Json::parse(read_file(dir / "vgood" / "verify_report.json"));
  CHECK(report["failures"].get<int>() == 0);

  const auto coarse = dir / "coarse.json";
  write_file(coarse, R"({
    "task": "dispersion",
    "lattice": {"dim": 1, "period": 1.0, "nmax": 2, "grid_size": 16},
    "potential": {"kind": "mathieu", "a": 2.0},
    "verify": {"draws": 2}
  })");
  CHECK(run_cli("verify " + coarse.string() + " --output " +
                (dir / "vcoarse").string()) == 3);
  const auto report2 = Json::parse(read_file(dir / "vcoarse" / "verify_report.json"));
  bool convergence_failed = false;
  for (const auto& c : report2["checks"])
    if (c["name"] == "convergence-bands" && !c["pass"].get<bool>())
      convergence_failed = true;
  CHECK(convergence_failed);
}

TEST_CASE("cli: usage errors exit 2") {
  CHECK(run_cli("run") == 2);
  CHECK(run_cli("frobnicate x") == 2);
  CHECK(run_cli("run /nonexistent/config.json") == 4);
}
