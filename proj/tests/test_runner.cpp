#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "acyc/config.hpp"
#include "acyc/runner.hpp"

using namespace acyc;
namespace fs = std::filesystem;

namespace {

std::string minimalAsymptotic() {
  return R"({
    "schemaVersion": 1,
    "subcommand": "asymptotic",
    "geometry": {"dim": 2},
    "subject": {"type": "linearFlow", "velocity": [0.5773502691896258, 0.8164965809277261]},
    "routes": ["form"],
    "schedules": {"window": {"count": 12}},
    "seed": 1
  })";
}

// what the error message must mention for the given broken document
void expectError(const std::string& text, const std::string& needle) {
  try {
    parse_config_text(text);
    FAIL("expected a ConfigError mentioning '" << needle << "'");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

fs::path freshDir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "acyc_runner_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// reports may differ only in the measured wall time
std::string stripWallTime(std::string s) {
  auto pos = s.find("\"wallTimeSeconds\"");
  REQUIRE(pos != std::string::npos);
  auto end = s.find('\n', pos);
  return s.erase(pos, end - pos);
}

}  // namespace

TEST_CASE("config validation rejects malformed documents with field paths") {
  expectError("{", "not valid JSON");
  expectError(R"({"schemaVersion": 2, "subcommand": "asymptotic", "subject": {}})",
              "schemaVersion");
  expectError(R"({"schemaVersion": 1, "subcommand": "frobnicate", "subject": {}})",
              "unknown subcommand");
  expectError(R"({"schemaVersion": 1, "subcommand": "asymptotic", "surprise": 3,
                  "subject": {"type": "linearFlow", "velocity": [1.0, 0.5]}})",
              "surprise: unknown field");
  expectError(R"({"schemaVersion": 1, "subcommand": "solenoid",
                  "subject": {"base": {"type": "rotation", "alpha": 0.3, "bogus": 1},
                              "realize": true}})",
              "subject.base.bogus: unknown field");
  expectError(R"({"schemaVersion": 1, "subcommand": "asymptotic",
                  "subject": {"type": "linearFlow", "velocity": [1.0, 0.5]},
                  "tolerances": {"route": -0.001}})",
              "tolerances.route");
  expectError(R"({"schemaVersion": 1, "subcommand": "asymptotic",
                  "subject": {"type": "linearFlow", "velocity": [1.0, 0.5]},
                  "tolerances": {"leap": 0.1}})",
              "tolerances.leap");
}

TEST_CASE("config validation enforces per-subcommand field ownership") {
  // geometry is only consumed by curve and stable norm pipelines
  expectError(R"({"schemaVersion": 1, "subcommand": "solenoid", "geometry": {"dim": 2},
                  "subject": {"base": {"type": "rotation", "alpha": 0.3}, "realize": true}})",
              "geometry: not consumed");
  expectError(R"({"schemaVersion": 1, "subcommand": "cluster",
                  "geometry": {"dim": 2},
                  "subject": {"type": "linearFlow", "velocity": [1.0, 0.5]},
                  "routes": ["form"]})",
              "routes");
  expectError(R"({"schemaVersion": 1, "subcommand": "asymptotic",
                  "geometry": {"dim": 2},
                  "subject": {"type": "counterexample"}})",
              "subject.type");
  // dimension cross-checks run before any numerics
  expectError(R"({"schemaVersion": 1, "subcommand": "asymptotic",
                  "geometry": {"dim": 3},
                  "subject": {"type": "linearFlow", "velocity": [1.0, 0.5]}})",
              "geometry.dim");
}

TEST_CASE("flow subjects must cover the scheduled windows") {
  // default horizon 64 cannot reach the default window ladder
  expectError(R"({"schemaVersion": 1, "subcommand": "asymptotic",
                  "geometry": {"dim": 2},
                  "subject": {"type": "flow",
                              "field": [{"constant": 0.6}, {"constant": 0.8}]}})",
              "subject.T");

  // an explicit window inside the horizon parses and runs
  auto cfg = parse_config_text(R"({
    "schemaVersion": 1,
    "subcommand": "asymptotic",
    "geometry": {"dim": 2},
    "subject": {"type": "flow", "T": 700.0,
                "field": [{"constant": 0.6,
                           "terms": [{"freq": [0, 1], "cos": 0.05}]},
                          {"constant": 0.8}]},
    "routes": ["form"],
    "schedules": {"window": {"s0": 5.0, "t0": 5.0, "count": 8}},
    "seed": 3
  })");
  auto dir = freshDir("flow");
  auto rep = run(cfg, dir.string());
  CHECK(rep.exitCode == 0);
  CHECK(rep.converged);
}

TEST_CASE("asymptotic run writes a report with per-route results") {
  auto cfg = parse_config_text(minimalAsymptotic());
  auto dir = freshDir("asymptotic");
  auto rep = run(cfg, dir.string());
  CHECK(rep.exitCode == 0);
  CHECK(rep.converged);
  REQUIRE(fs::exists(dir / "report.json"));
  auto doc = nlohmann::json::parse(rep.json);
  CHECK(doc.at("results").at("routes").contains("form"));
  CHECK(doc.at("results").at("joint").at("converged").get<bool>());

  // the config echo in the report must itself be a valid config
  auto echoed = parse_config_text(doc.at("config").dump());
  CHECK(echoed.subcommand == "asymptotic");
  CHECK(echoed.routes.size() == 1);
}

TEST_CASE("declared assertions decide the exit code") {
  // crossing counts carry O(1/t) noise, so this tolerance cannot converge
  std::string text = R"({
    "schemaVersion": 1,
    "subcommand": "asymptotic",
    "geometry": {"dim": 2},
    "subject": {"type": "linearFlow", "velocity": [0.5773502691896258, 0.8164965809277261]},
    "routes": ["circle"],
    "tolerances": {"route": 1e-15},
    "seed": 1
  })";
  auto quiet = parse_config_text(text);
  auto repQuiet = run(quiet, freshDir("quiet").string());
  CHECK_FALSE(repQuiet.converged);
  CHECK(repQuiet.exitCode == 0);  // nothing was asserted

  std::string asserted = text;
  asserted.insert(asserted.rfind('}'), R"(, "assertions": {"converged": true})");
  auto loud = parse_config_text(asserted);
  auto repLoud = run(loud, freshDir("loud").string());
  CHECK_FALSE(repLoud.converged);
  CHECK(repLoud.exitCode == 1);
  REQUIRE(repLoud.assertions.size() == 1);
  CHECK(repLoud.assertions[0].name == "converged");
  CHECK_FALSE(repLoud.assertions[0].pass);
}

TEST_CASE("reports are identical across runs and thread counts") {
  std::string text = R"({
    "schemaVersion": 1,
    "subcommand": "solenoid",
    "subject": {"base": {"type": "rotation", "alpha": "golden"}, "realize": true,
                "seeds": 6, "N": 2000},
    "tolerances": {"leaf": 0.05},
    "seed": 99
  })";
  auto cfg = parse_config_text(text);
  auto d1 = freshDir("det1"), d2 = freshDir("det2"), d3 = freshDir("det3");
  run(cfg, d1.string(), 1);
  run(cfg, d2.string(), 1);
  run(cfg, d3.string(), 4);
  std::string r1 = stripWallTime(slurp(d1 / "report.json"));
  CHECK(r1 == stripWallTime(slurp(d2 / "report.json")));
  CHECK(r1 == stripWallTime(slurp(d3 / "report.json")));
  CHECK(slurp(d1 / "leaf_classes.csv") == slurp(d3 / "leaf_classes.csv"));
}

TEST_CASE("cluster run writes the point cloud files") {
  auto cfg = parse_config_text(R"({
    "schemaVersion": 1,
    "subcommand": "cluster",
    "geometry": {"dim": 2},
    "subject": {"type": "linearFlow", "velocity": [0.5773502691896258, 0.8164965809277261]},
    "seed": 2
  })");
  auto dir = freshDir("cluster");
  auto rep = run(cfg, dir.string());
  CHECK(rep.exitCode == 0);
  for (const char* name :
       {"cluster_full.csv", "cluster_positive.csv", "cluster_negative.csv",
        "cluster_balanced.csv"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(dir / name));
    std::string head = slurp(dir / name).substr(0, 18);
    CHECK(head == "coord_0,coord_1,s,");
  }
}

TEST_CASE("stable norm run reproduces the flat answer exactly") {
  auto cfg = parse_config_text(R"({
    "schemaVersion": 1,
    "subcommand": "stablenorm",
    "geometry": {"dim": 2},
    "subject": {"classes": [[3, 4]], "nMax": 6, "resolution": 16},
    "seed": 1,
    "assertions": {"targets": [5.0], "targetsTol": 1e-12}
  })");
  auto dir = freshDir("stablenorm");
  auto rep = run(cfg, dir.string());
  CHECK(rep.exitCode == 0);
  double value =
      nlohmann::json::parse(rep.json).at("results").at("classes").at(0).at("value").get<double>();
  CHECK(value == 5.0);
  std::string csv = slurp(dir / "stablenorm_0.csv");
  CHECK(csv.substr(0, csv.find('\n')) == "n,loop_length,upper_bound,running_min");
}

TEST_CASE("ksolenoid run reports the window ladder and the exhaustion audit") {
  auto cfg = parse_config_text(R"({
    "schemaVersion": 1,
    "subcommand": "ksolenoid",
    "subject": {"k": 2, "base": {"type": "rotation", "alpha": "golden"},
                "t3": {"wrap": [0.3819660112501051, 1.0]},
                "seeds": [0.15, 0.6], "b0": 16, "windows": 8,
                "radii": {"dyadicFrom": 3, "dyadicTo": 7}},
    "tolerances": {"kclass": 0.01},
    "seed": 4,
    "assertions": {"converged": true, "exhaustionWithinBound": true}
  })");
  auto dir = freshDir("ksolenoid");
  auto rep = run(cfg, dir.string());
  CHECK(rep.exitCode == 0);
  auto ex = nlohmann::json::parse(rep.json).at("results").at("exhaustion");
  CHECK(ex.at("allWithinBound").get<bool>());
  CHECK(ex.at("rows").size() == 5);
  CHECK(fs::exists(dir / "k_classes.csv"));
}

TEST_CASE("golden manifest is stable and complete") {
  auto manifest = list_golden();
  CHECK(manifest.size() >= 10);

  std::set<std::string> names;
  bool sawLinear = false, sawCounterexample = false, sawInvalid = false;
  for (const auto& e : manifest) {
    CHECK(names.insert(e.name).second);  // unique names
    CHECK((e.expectedExit == 0 || e.expectedExit == 2));
    if (e.name == "linear_flow") sawLinear = true;
    if (e.name == "counterexample") sawCounterexample = true;
    if (e.expectedExit == 2) sawInvalid = true;
  }
  CHECK(sawLinear);
  CHECK(sawCounterexample);
  CHECK(sawInvalid);

  auto again = list_golden();
  REQUIRE(again.size() == manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    CHECK(again[i].name == manifest[i].name);
    CHECK(again[i].file == manifest[i].file);
    CHECK(again[i].expectedExit == manifest[i].expectedExit);
  }
}
