#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "acyc/config.hpp"
#include "acyc/runner.hpp"

// acyc <subcommand> --config <path> --out <dir> [--threads N]
//
// Exit codes: 0 all declared assertions pass, 1 assertion failure,
// 2 config error (message names the offending JSON field), 3 numerical
// failure. Non-convergence alone reports converged=false and exits 0
// unless the config declares convergence as an assertion.
//
// The extra `golden` verb prints the bundled-config manifest as
// tab-separated "name file subcommand expectedExit" lines for test
// drivers.

namespace {

int runOne(const std::string& subcommand, const std::string& configPath,
           const std::string& outDir, int threads) {
  acyc::ExperimentConfig cfg;
  try {
    cfg = acyc::parse_config_file(configPath);
    if (cfg.subcommand != subcommand)
      throw acyc::ConfigError("subcommand: config declares '" + cfg.subcommand +
                              "' but was invoked as '" + subcommand + "'");
  } catch (const acyc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  try {
    acyc::Report rep = acyc::run(cfg, outDir, threads);
    for (const auto& a : rep.assertions)
      std::printf("%s %s: %s\n", a.pass ? "PASS" : "FAIL", a.name.c_str(), a.detail.c_str());
    std::printf("%s: converged=%s, report written to %s/report.json\n", subcommand.c_str(),
                rep.converged ? "true" : "false", outDir.c_str());
    return rep.exitCode;
  } catch (const acyc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asymptotic-cycle laboratory"};
  app.require_subcommand(1);

  const char* names[] = {"asymptotic", "cluster",    "solenoid",
                         "ksolenoid",  "stablenorm", "counterexample"};
  struct Args {
    std::string config, out = ".";
    int threads = 1;
  };
  std::vector<Args> args(std::size(names));
  for (std::size_t i = 0; i < std::size(names); ++i) {
    auto* sub = app.add_subcommand(names[i]);
    sub->add_option("--config", args[i].config, "experiment config JSON")->required();
    sub->add_option("--out", args[i].out, "output directory for the report and CSVs");
    sub->add_option("--threads", args[i].threads, "worker threads for independent seeds")
        ->check(CLI::Range(1, 64));
  }
  auto* golden = app.add_subcommand("golden", "print the bundled-config manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // --help exits 0, any parse problem is a config error
  }

  if (golden->parsed()) {
    for (const auto& e : acyc::list_golden())
      std::printf("%s\t%s\t%s\t%d\n", e.name.c_str(), e.file.c_str(), e.subcommand.c_str(),
                  e.expectedExit);
    return 0;
  }
  for (std::size_t i = 0; i < std::size(names); ++i)
    if (app.get_subcommand(names[i])->parsed())
      return runOne(names[i], args[i].config, args[i].out, args[i].threads);
  return 2;
}
