#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pcinterp/io.hpp"

using namespace pcinterp;

namespace {

std::string fixture(const std::string& name) {
  return std::string(FIXTURES_DIR) + "/" + name;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(PCINTERP_BIN) + " " + args + " 2> cli_err.txt";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

Json load(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  Json j;
  in >> j;
  return j;
}

double num(const Json& j) { return std::stod(j.get<std::string>()); }

}  // namespace

TEST_CASE("density JSON round trip") {
  Json j = {
      {"T", 2},
      {"form", "scalar_rational"},
      {"structure", "diagonal"},
      {"atoms",
       {{{"type", "mod2"}, {"v", {2, 0}}, {"w", {1, 0}}},
        {{"type", "ar1"}, {"u", {0.3, 0.4}}}}},
  };
  auto d = density_from_json(j);
  auto d2 = density_from_json(density_to_json(d));
  for (double lambda : {0.0, 1.1, -2.7})
    CHECK((d.evaluate(lambda) - d2.evaluate(lambda)).cwiseAbs().maxCoeff() <
          1e-15);

  Json c = {{"T", 1}, {"form", "constant"}, {"H", {{{2, 0}}}}};
  auto dc = density_from_json(c);
  CHECK(std::abs(dc.evaluate(0.5)(0, 0) - cd(2, 0)) < 1e-15);

  Json bad = {{"T", 2}, {"form", "nonsense"}};
  CHECK_THROWS_AS(density_from_json(bad), SchemaError);
  Json root_on_circle = {
      {"T", 1},
      {"form", "scalar_rational"},
      {"atoms", {{{"type", "mod2"}, {"v", {1, 0}}, {"w", {1, 0}}}}}};
  CHECK_THROWS_AS(density_from_json(root_on_circle), SchemaError);
}

TEST_CASE("pattern and functional JSON") {
  auto p = pattern_from_json(
      {{"T", 2}, {"intervals", {{{"start", 1}, {"len", 4}}}}});
  CHECK(p.period() == 2);
  CHECK(p.size() == 4);
  CHECK_THROWS_AS(pattern_from_json({{"T", 2}}), SchemaError);

  auto f = functional_from_json(
      {{"mode", "pc_block"},
       {"coeffs", {{{"j", 1}, {"re", 1.0}}, {{"j", 2}, {"re", -1.0}}}}});
  CHECK(f.mode == FunctionalMode::kPcBlock);
  CHECK(f.scalar.at(2) == cd(-1, 0));

  CHECK_THROWS_AS(functional_from_json({{"mode", "weird"},
                                        {"coeffs", Json::array()}}),
                  SchemaError);
}

TEST_CASE("the blocked-pair fixture reproduces delta = 20/21 end to end") {
  std::remove("s5_report.json");
  int code = run_cli("--config " + fixture("blocked_pair_interpolate.json") +
                     " --out s5_report.json --emit-filter s5_filter.csv");
  CHECK(code == kExitOk);
  Json rep = load("s5_report.json");
  CHECK(std::abs(num(rep["delta"]) - 20.0 / 21) < 1e-12);

  // PC-time taps at (-1, 0, 5, 6)
  std::map<long, double> pc;
  for (const auto& row : rep["pc_taps"])
    pc[row["index"].get<long>()] = num(row["re"]);
  REQUIRE(pc.size() == 4);
  CHECK(std::abs(pc.at(-1) + 2.0 / 3) < 1e-12);
  CHECK(std::abs(pc.at(0) - 3.0 / 7) < 1e-12);
  CHECK(std::abs(pc.at(5) - 2.0 / 3) < 1e-12);
  CHECK(std::abs(pc.at(6) - 3.0 / 7) < 1e-12);

  std::ifstream csv("s5_filter.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "lag,component,re,im");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("the minimax fixture reproduces delta0 = 10/9") {
  int code = run_cli("--config " + fixture("minimax_d0_pair.json") +
                     " --out e71_report.json");
  CHECK(code == kExitOk);
  Json rep = load("e71_report.json");
  CHECK(std::abs(num(rep["delta0"]) - 10.0 / 9) < 1e-12);
  for (const auto& row : rep["taps"]) {
    CHECK(row["lag"].get<long>() == -2);
    CHECK(std::abs(num(row["re"]) + 2.0) < 1e-10);
  }
  CHECK(rep["hypothesis"]["positive_definite"].get<bool>());
}

TEST_CASE("minimax via the scalar PC route matches the vector route") {
  Json cfg = {
      {"command", "minimax-d0"},
      {"P", {{{23, 0}, {22, 0}}, {{22, 0}, {23, 0}}}},
      {"pattern",
       {{"T", 2},
        {"intervals", {{{"start", 1}, {"len", 2}}, {{"start", 5}, {"len", 2}}}}}},
      {"functional",
       {{"mode", "pc_block"},
        {"coeffs",
         {{{"j", 1}, {"re", 5.0}},
          {{"j", 2}, {"re", 5.0}},
          {{"j", 5}, {"re", 2.0}},
          {{"j", 6}, {"re", 2.0}}}}}},
      {"quad", {{"grid", 1024}}}};
  std::ofstream("d0_pc_cfg.json") << cfg.dump();
  CHECK(run_cli("--config d0_pc_cfg.json --out d0_pc_report.json") == kExitOk);
  Json rep = load("d0_pc_report.json");
  CHECK(std::abs(num(rep["delta0"]) - 10.0 / 9) < 1e-12);
  // taps at blocked lag -2 unblock to PC indices -3 and -2
  std::map<long, double> pc;
  for (const auto& row : rep["pc_taps"])
    pc[row["index"].get<long>()] = num(row["re"]);
  REQUIRE(pc.size() == 2);
  CHECK(std::abs(pc.at(-3) + 2.0) < 1e-10);
  CHECK(std::abs(pc.at(-2) + 2.0) < 1e-10);
}

TEST_CASE("malformed configs exit with the schema code and no report") {
  std::remove("mal_report.json");
  int code = run_cli("--config " + fixture("malformed.json") +
                     " --out mal_report.json");
  CHECK(code == kExitSchema);
  std::ifstream probe("mal_report.json");
  CHECK_FALSE(probe.good());
}

TEST_CASE("hypothesis violations map to their exit code") {
  Json cfg = load(fixture("minimax_d0_pair.json"));
  // an over-aggressive functional breaks positive definiteness
  cfg["functional"]["coeffs"][1]["v"] = {{40, 0}, {40, 0}};
  std::ofstream("dg_bad.json") << cfg.dump();
  CHECK(run_cli("--config dg_bad.json --out dg_bad_report.json") ==
        kExitHypothesis);
}

TEST_CASE("reports are deterministic up to the timestamp") {
  CHECK(run_cli("--config " + fixture("blocked_pair_interpolate.json") +
                " --out det_a.json") == kExitOk);
  CHECK(run_cli("--config " + fixture("blocked_pair_interpolate.json") +
                " --out det_b.json") == kExitOk);
  Json a = load("det_a.json");
  Json b = load("det_b.json");
  a.erase("generated_at");
  b.erase("generated_at");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("verify round-trips a recorded report") {
  REQUIRE(run_cli("--config " + fixture("blocked_pair_interpolate.json") +
                  " --out verify_input.json") == kExitOk);
  Json vcfg = {{"command", "verify"}, {"report", "verify_input.json"}};
  std::ofstream("verify_cfg.json") << vcfg.dump();
  CHECK(run_cli("--config verify_cfg.json --out verify_report.json") ==
        kExitOk);
  Json rep = load("verify_report.json");
  CHECK(rep["verified"].get<bool>());
  CHECK(num(rep["difference"]) <= 1e-12);
}

TEST_CASE("grid flag overrides are baked into the embedded config") {
  CHECK(run_cli("--config " + fixture("blocked_pair_interpolate.json") +
                " --grid 1024 --out grid_report.json") == kExitOk);
  Json rep = load("grid_report.json");
  CHECK(rep["config"]["quad"]["grid"].get<int>() == 1024);
  CHECK(std::abs(num(rep["delta"]) - 20.0 / 21) < 1e-12);
}

TEST_CASE("simulate command emits a calibrated report") {
  Json cfg = {
      {"command", "simulate"},
      {"generator",
       {{"kind", "scalar_pc"},
        {"components", {{{2, 0}, {1, 0}}, {{3, 0}, {-1, 0}}}},
        {"burn_in", 256}}},
      {"pattern", {{"T", 2}, {"intervals", {{{"start", 1}, {"len", 4}}}}}},
      {"functional",
       {{"mode", "pc_block"},
        {"coeffs",
         {{{"j", 1}, {"re", 1.0}},
          {{"j", 2}, {"re", 1.0}},
          {{"j", 3}, {"re", -1.0}},
          {{"j", 4}, {"re", 1.0}}}}}},
      {"trials", 20000},
      {"seed", 2024},
      {"per_trial_csv", "sim_trials.csv"},
      {"quad", {{"grid", 1024}}}};
  std::ofstream("sim_cfg.json") << cfg.dump();
  CHECK(run_cli("--config sim_cfg.json --out sim_report.json") == kExitOk);
  Json rep = load("sim_report.json");
  CHECK(std::abs(num(rep["analytic_delta"]) - 20.0 / 21) < 1e-10);
  CHECK(std::abs(num(rep["z"])) < 4.0);

  std::ifstream csv("sim_trials.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "trial,squared_error");
  long rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 20000);
}

TEST_CASE("the environment variable sets the default grid") {
  Json cfg = load(fixture("blocked_pair_interpolate.json"));
  cfg.erase("quad");
  std::ofstream("env_cfg.json") << cfg.dump();
  std::string cmd = std::string("PCINTERP_GRID=2048 ") + PCINTERP_BIN +
                    " --config env_cfg.json --out env_report.json 2> cli_err.txt";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == kExitOk);
  Json rep = load("env_report.json");
  CHECK(rep["config"]["quad"]["grid"].get<int>() == 2048);
}

TEST_CASE("pc_lift with period 1 matches the vector route") {
  Json base = {
      {"command", "interpolate"},
      {"f",
       {{"T", 1},
        {"form", "scalar_rational"},
        {"structure", "diagonal"},
        {"atoms", {{{"type", "ar1"}, {"u", {0.5, 0}}}}}}},
      {"pattern", {{"T", 1}, {"intervals", {{{"start", 1}, {"len", 2}}}}}},
      {"quad", {{"grid", 1024}}}};
  Json lifted = base;
  lifted["functional"] = {
      {"mode", "pc_lift"},
      {"coeffs", {{{"j", 1}, {"re", 1.0}}, {{"j", 2}, {"re", -0.5}}}}};
  Json vec = base;
  vec["functional"] = {{"mode", "vector"},
                       {"coeffs",
                        {{{"j", 1}, {"v", {{1, 0}}}},
                         {{"j", 2}, {"v", {{-0.5, 0}}}}}}};
  RunOptions opts;
  Json a = execute_command(lifted, opts);
  Json b = execute_command(vec, opts);
  CHECK(num(a["delta"]) == doctest::Approx(num(b["delta"])).epsilon(1e-14));
  CHECK(a["taps"].dump() == b["taps"].dump());
}

TEST_CASE("quadrature config validation") {
  CHECK(quad_from_json({{"grid", 1024}}).grid_n == 1024);
  CHECK(quad_from_json({{"grid", 1024}, {"tol", 1e-8}}).tol == 1e-8);
  CHECK_THROWS_AS(quad_from_json({{"grid", 1000}}), SchemaError);
  CHECK_THROWS_AS(quad_from_json({{"grid", 4}}), SchemaError);
  CHECK_THROWS_AS(quad_from_json({{"grid", 1024}, {"tol", -1.0}}), SchemaError);
}

TEST_CASE("number formatting keeps 17 significant digits") {
  CHECK(format_number(20.0 / 21) == "0.95238095238095233");
  CHECK(parse_number(Json("0.95238095238095233"), "x") ==
        doctest::Approx(20.0 / 21).epsilon(1e-16));
}
