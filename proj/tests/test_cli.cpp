#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "conecalc/cli_driver.hpp"
#include "conecalc/ellipticity.hpp"
#include "conecalc/json_io.hpp"
#include "conecalc/types.hpp"

using namespace conecalc;
using io::Json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "conecalc_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream out(p);
  out << text;
  return p;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"conecalc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

Json read_report(const fs::path& dir) {
  std::ifstream in(dir / "report.json");
  REQUIRE(in.good());
  return Json::parse(in);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_timestamp(const std::string& text) {
  std::stringstream in(text), out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("\"timestamp\"") == std::string::npos) out << line << "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("weight-window run writes a full report") {
  const fs::path dir = fresh_dir("ww");
  const fs::path cfg = write_config(
      dir, R"({"command":"weight-window","parameters":{"n":3,"lambda0":-1}})");

  CHECK(run({"--config", cfg.string(), "--out", dir.string()}) == 0);

  const Json report = read_report(dir);
  CHECK(report.at("command") == "weight-window");
  CHECK(report.at("tool").contains("name"));
  CHECK(report.at("tool").contains("version"));
  CHECK(report.at("seed").get<std::uint64_t>() == 0x5EED);
  CHECK(report.at("timestamp").get<std::string>().size() == 20);

  const elliptic::WeightWindow oracle =
      elliptic::weight_window(3, RVec::Constant(1, -1.0));
  CHECK(report.at("results").at("s0").get<double>() ==
        doctest::Approx(oracle.s0).epsilon(1e-14));
  CHECK(report.at("results").at("admissible").get<bool>() == oracle.admissible);
  REQUIRE(oracle.admissible);
  CHECK(report.at("results").at("lower").get<double>() ==
        doctest::Approx(oracle.lo).epsilon(1e-14));
  CHECK(report.at("results").at("upper").get<double>() ==
        doctest::Approx(oracle.hi).epsilon(1e-14));

  REQUIRE(report.at("verdicts").size() == 1);
  CHECK(report.at("verdicts")[0].at("condition") == "weight-window-admissible");
  CHECK(report.at("verdicts")[0].at("verdict") == "pass");
}

TEST_CASE("sector-check writes the scan table and honors the bound") {
  const fs::path dir = fresh_dir("sc_pass");
  const fs::path cfg = write_config(
      dir,
      R"({"command":"sector-check","parameters":{"theta":1.5707963267948966,)"
      R"("operator":{"type":"diagonal","entries":[[1,0],[2,0]]}}})");
  CHECK(run({"--config", cfg.string(), "--out", dir.string()}) == 0);

  const Json report = read_report(dir);
  CHECK(report.at("results").at("sup_norm").get<double>() ==
        doctest::Approx(1.0).epsilon(1e-6));
  const std::string csv = read_file(dir / "scan.csv");
  CHECK(csv.rfind("radius,angle,norm\n", 0) == 0);
  CHECK(static_cast<int>(report.at("results").at("samples").get<int>()) > 100);

  // A bound below the measured sup flips the verdict and the exit code.
  const fs::path dir2 = fresh_dir("sc_fail");
  const fs::path cfg2 = write_config(
      dir2,
      R"({"command":"sector-check","parameters":{"theta":1.5707963267948966,)"
      R"("operator":{"type":"diagonal","entries":[[1,0]]},"bound":0.5}})");
  CHECK(run({"--config", cfg2.string(), "--out", dir2.string()}) == 2);
  const Json r2 = read_report(dir2);
  CHECK(r2.at("verdicts")[0].at("condition") == "resolvent-bound");
  CHECK(r2.at("verdicts")[0].at("verdict") == "fail");
}

TEST_CASE("bad inputs exit with code one") {
  const fs::path dir = fresh_dir("bad");

  const fs::path unknown = write_config(dir, R"({"command":"frobnicate"})");
  CHECK(run({"--config", unknown.string(), "--out", dir.string()}) == 1);

  const fs::path badkey = write_config(
      dir, R"({"command":"weight-window","params":{"n":3,"lambda0":-1}})");
  CHECK(run({"--config", badkey.string(), "--out", dir.string()}) == 1);

  const fs::path badparam = write_config(
      dir,
      R"({"command":"weight-window","parameters":{"n":3,"lambda0":-1,"zz":1}})");
  CHECK(run({"--config", badparam.string(), "--out", dir.string()}) == 1);

  const fs::path malformed = write_config(dir, "{ not json");
  CHECK(run({"--config", malformed.string(), "--out", dir.string()}) == 1);

  CHECK(run({"--config", (dir / "missing.json").string()}) == 1);

  CHECK(run({"--version"}) == 0);
}

TEST_CASE("reports are byte-identical across reruns") {
  const std::string sc =
      R"({"command":"sector-check","parameters":{"theta":1.5707963267948966,)"
      R"("operator":{"type":"diagonal","entries":[[1,0],[2,0]]}}})";
  const std::string hb =
      R"({"command":"hinf-bound","parameters":{"theta":1.5707963267948966,)"
      R"("operator":{"type":"diagonal","entries":[[1,0],[4,0]]}}})";

  struct Pair {
    std::string name;
    const std::string* cfg;
    std::string csv;
  };
  for (const Pair& c : {Pair{"det_sc", &sc, "scan.csv"},
                        Pair{"det_hb", &hb, "ratios.csv"}}) {
    const fs::path dir1 = fresh_dir(c.name + "_1");
    const fs::path dir2 = fresh_dir(c.name + "_2");
    const fs::path cfg1 = write_config(dir1, *c.cfg);
    CAPTURE(c.name);
    CHECK(run({"--config", cfg1.string(), "--out", dir1.string()}) == 0);
    CHECK(run({"--config", cfg1.string(), "--out", dir2.string()}) == 0);
    CHECK(strip_timestamp(read_file(dir1 / "report.json")) ==
          strip_timestamp(read_file(dir2 / "report.json")));
    CHECK(read_file(dir1 / c.csv) == read_file(dir2 / c.csv));
  }
}

TEST_CASE("seed precedence is flag over env over config") {
  unsetenv("CONECALC_SEED");
  const fs::path dir = fresh_dir("seed");
  const fs::path cfg = write_config(
      dir,
      R"({"command":"weight-window","parameters":{"n":3,"lambda0":-1},"seed":7})");

  CHECK(run({"--config", cfg.string(), "--out", dir.string()}) == 0);
  CHECK(read_report(dir).at("seed").get<std::uint64_t>() == 7);

  setenv("CONECALC_SEED", "9", 1);
  CHECK(run({"--config", cfg.string(), "--out", dir.string()}) == 0);
  CHECK(read_report(dir).at("seed").get<std::uint64_t>() == 9);

  CHECK(run({"--config", cfg.string(), "--out", dir.string(), "--seed",
             "11"}) == 0);
  CHECK(read_report(dir).at("seed").get<std::uint64_t>() == 11);
  unsetenv("CONECALC_SEED");

  const fs::path nodefault = write_config(
      dir, R"({"command":"weight-window","parameters":{"n":3,"lambda0":-1}})");
  CHECK(run({"--config", nodefault.string(), "--out", dir.string()}) == 0);
  CHECK(read_report(dir).at("seed").get<std::uint64_t>() == 0x5EED);
}
