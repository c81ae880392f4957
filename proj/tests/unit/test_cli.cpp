#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sedge/cli.hpp"
#include "sedge/limitlaws.hpp"

using namespace sedge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("sedge_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "spectral-edge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

nlohmann::json load(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("equilibrium command") {
  auto d = scratch("eq");
  CHECK(run({"equilibrium", "--potential", "gue", "--out", d.string()}) == kExitOk);
  auto j = load(d / "equilibrium.json");
  CHECK(std::fabs(j["a1"].get<double>() - 2) < 1e-10);
  CHECK(fs::exists(d / "equilibrium.csv"));

  CHECK(run({"equilibrium", "--potential", "quartic", "--out", d.string()}) == kExitOk);
  auto q = load(d / "equilibrium.json");
  CHECK(std::fabs(q["a1"].get<double>() + q["b0"].get<double>()) < 1e-10);
}

TEST_CASE("malformed potentials are input errors") {
  auto d = scratch("bad");
  auto p = d / "v.json";
  std::ofstream(p) << "{\"coefficients\": [0, 0, \"half\"]}";
  CHECK(run({"equilibrium", "--potential", p.string(), "--out", d.string()}) == kExitInput);
  std::ofstream(p) << "{not json";
  CHECK(run({"equilibrium", "--potential", p.string(), "--out", d.string()}) == kExitInput);
  CHECK(run({"equilibrium", "--potential", "nosuch", "--out", d.string()}) == kExitInput);
  CHECK(load(d / "manifest.json")["exit_code"] == kExitInput);
}

TEST_CASE("solver failures are numeric errors") {
  auto d = scratch("num");
  auto p = d / "dw.json";
  std::ofstream(p) << "{\"label\": \"doublewell\", \"coefficients\": [0, 0, -2, 0, 0.25]}";
  CHECK(run({"equilibrium", "--potential", p.string(), "--out", d.string()}) == kExitNumeric);
}

TEST_CASE("critical command") {
  auto d = scratch("crit");
  CHECK(run({"critical", "--potential", "gue", "--a", "0.5", "--a", "2", "--points", "11", "--out", d.string()}) ==
        kExitOk);
  auto j = load(d / "critical.json");
  CHECK(std::fabs(j["a_c"].get<double>() - 1) < 1e-6);
  CHECK(j["secondary"].empty());
  CHECK(csv_rows(d / "critical.csv").size() == 22);

  CHECK(run({"critical", "--potential", "eynard:3,0.02", "--out", d.string()}) == kExitOk);
  CHECK(load(d / "critical.json")["a_c_below_half"] == true);
}

TEST_CASE("law command") {
  auto d = scratch("law");
  CHECK(run({"law", "--potential", "gue", "--a", "2", "--n", "100", "--out", d.string()}) == kExitOk);
  auto j = load(d / "law.json");
  CHECK(j["law"]["kind"] == "Gauss");
  CHECK(std::fabs(j["law"]["center"].get<double>() - 2.5) < 1e-8);

  CHECK(run({"law", "--potential", "gue", "--a-critical", "--alpha", "0", "--T-min", "-4", "--T-max", "10", "--T-steps",
             "15", "--out", d.string()}) == kExitOk);
  auto f1rows = csv_rows(d / "law.csv");
  CHECK(load(d / "law.json")["law"]["kind"] == "F1");
  CHECK(std::fabs(f1rows.back()[2] - 1) < 1e-6);

  CHECK(run({"law", "--potential", "gue", "--a", "0.5", "--T-steps", "19", "--out", d.string()}) == kExitOk);
  for (const auto& r : csv_rows(d / "law.csv")) {
    double ref = std::clamp(f0(r[0]), 0.0, 1.0);
    CHECK(r[2] == ref);
  }

  CHECK(run({"law", "--potential", "gue", "--alpha", "1", "--out", d.string()}) == kExitInput);
  CHECK(run({"law", "--potential", "gue", "--a", "1", "--a", "2", "--out", d.string()}) == kExitInput);
}

TEST_CASE("json format embeds rows") {
  auto d = scratch("fmt");
  CHECK(run({"law", "--potential", "gue", "--a", "2", "--T-steps", "5", "--format", "json", "--out", d.string()}) ==
        kExitOk);
  CHECK_FALSE(fs::exists(d / "law.csv"));
  CHECK(load(d / "law.json")["rows"].size() == 5);
  CHECK(run({"law", "--potential", "gue", "--a", "2", "--format", "xml", "--out", d.string()}) == kExitInput);
}

TEST_CASE("gap command") {
  auto d = scratch("gap");
  CHECK(run({"gap", "--potential", "gue", "--a", "0", "--n", "20", "--T-min", "4", "--T-max", "8", "--T-steps", "3",
             "--out", d.string()}) == kExitOk);
  auto rows = csv_rows(d / "gap.csv");
  CHECK(rows.back()[2] > 1 - 1e-6);
  CHECK(run({"gap", "--potential", "gue", "--a", "2", "--n", "20", "--interval", "J", "--T-steps", "5", "--out",
             d.string()}) == kExitOk);
  CHECK(run({"gap", "--potential", "gue", "--a", "0.5", "--n", "20", "--interval", "J", "--out", d.string()}) ==
        kExitInput);
  CHECK(run({"gap", "--potential", "gue", "--a", "0.5", "--n", "200", "--out", d.string()}) == kExitInput);
}

namespace {

double gap_law_distance(int n, const fs::path& d) {
  auto g = d / ("g" + std::to_string(n)), l = d / ("l" + std::to_string(n)), c = d / ("c" + std::to_string(n));
  REQUIRE(run({"gap", "--potential", "gue", "--a", "0.5", "--n", std::to_string(n), "--T-min", "-4", "--T-max", "2",
               "--T-steps", "13", "--out", g.string()}) == kExitOk);
  REQUIRE(run({"law", "--potential", "gue", "--a", "0.5", "--n", std::to_string(n), "--out", l.string()}) == kExitOk);
  CHECK(load(l / "law.json")["law"]["kind"] == "F0");
  REQUIRE(run({"compare", "--gap-file", (g / "gap.json").string(), "--law-file", (l / "law.json").string(), "--tol",
               "0.05", "--out", c.string()}) == kExitOk);
  auto rep = load(c / "compare.json");
  double stat = rep["pairs"][0]["statistic"].get<double>();
  CHECK(rep["pass"] == (stat < 0.05));
  return stat;
}

}  // namespace

// The subcritical spike leaves an n^{-1/3} correction, about 0.087 at n = 80.
TEST_CASE("compare gap with law at n = 80" * doctest::may_fail()) {
  CHECK(gap_law_distance(80, scratch("cmpgap80")) < 0.05);
}

TEST_CASE("gap to law distance decays with n") {
  auto d = scratch("cmpgap");
  double s72 = gap_law_distance(72, d), s128 = gap_law_distance(128, d);
  CHECK(s128 < s72);
  CHECK(s72 / s128 > 1.1);
  CHECK(s128 < 0.08);
}

TEST_CASE("compare sample with law") {
  auto d = scratch("cmpmc");
  auto m = d / "m", l = d / "l";
  CHECK(run({"montecarlo", "--potential", "gue", "--a", "2", "--n", "400", "--reps", "2000", "--seed", "4", "--out",
             m.string()}) == kExitOk);
  CHECK(run({"law", "--potential", "gue", "--a", "2", "--n", "400", "--out", l.string()}) == kExitOk);
  CHECK(run({"compare", "--mc-file", (m / "sample.csv").string(), "--law-file", (l / "law.json").string(), "--out",
             d.string()}) == kExitOk);
  CHECK(load(d / "compare.json")["pairs"][0]["statistic"].get<double>() < 0.08);

  auto l2 = d / "l2";
  CHECK(run({"law", "--potential", "gue", "--a", "2", "--n", "200", "--out", l2.string()}) == kExitOk);
  CHECK(run({"compare", "--mc-file", (m / "sample.csv").string(), "--law-file", (l2 / "law.json").string(), "--out",
             d.string()}) == kExitInput);
  CHECK(run({"compare", "--mc-file", (m / "sample.csv").string(), "--out", d.string()}) == kExitInput);
}

TEST_CASE("montecarlo methods") {
  auto d = scratch("mc");
  CHECK(run({"montecarlo", "--potential", "quartic", "--a", "0.5", "--n", "8", "--method", "mcmc", "--steps", "400",
             "--burn-in", "100", "--out", d.string()}) == kExitOk);
  auto side = load(d / "sample.csv.json");
  CHECK(side["method"] == "mcmc");
  CHECK(side["acceptance"].get<double>() >= 0.1);
  CHECK(run({"montecarlo", "--potential", "quartic", "--a", "0.5", "--n", "8", "--out", d.string()}) == kExitInput);
  CHECK(run({"montecarlo", "--potential", "gue", "--a", "0.5", "--n", "8", "--method", "exact", "--out", d.string()}) ==
        kExitInput);
}

TEST_CASE("runs are deterministic and manifests round trip") {
  auto d1 = scratch("det1"), d2 = scratch("det2");
  for (const auto& d : {d1, d2})
    CHECK(run({"montecarlo", "--potential", "gue", "--a", "1.1", "--n", "50", "--reps", "200", "--seed", "12", "--out",
               d.string()}) == kExitOk);
  CHECK(slurp(d1 / "sample.csv") == slurp(d2 / "sample.csv"));
  auto man = load(d1 / "manifest.json");
  CHECK(man["exit_code"] == 0);
  CHECK(man["seed"] == 12);
  auto cfg = RunConfig::from_json(man);
  auto back = cfg.to_json();
  man.erase("threads");
  man.erase("exit_code");
  CHECK(back == man);
  CHECK(RunConfig::from_json(back) == cfg);
  CHECK_THROWS_AS(RunConfig::from_json({{"command", "law"}}), InvalidInput);
}

TEST_CASE("process exit codes") {
  auto d = scratch("proc");
  const std::string bin = SPECTRAL_EDGE_BIN;
  auto code = [&](const std::string& args) {
    int rc = std::system((bin + " " + args + " --out " + d.string() + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  CHECK(code("equilibrium --potential gue") == 0);
  CHECK(code("equilibrium --potential eynard:1,0.5") == 2);
  CHECK(code("law --potential gue --n notanumber") == 2);
  auto p = d / "dw.json";
  std::ofstream(p) << "{\"coefficients\": [0, 0, -2, 0, 0.25]}";
  CHECK(code("equilibrium --potential " + p.string()) == 3);
}
