#pragma once

#include <string>
#include <vector>

#include "acyc/config.hpp"

// Config-driven experiment runner. run() dispatches a validated
// configuration to the module pipelines, writes report.json plus CSV
// artifacts into the output directory, and grades the declared assertions.
// Reports are byte-identical across runs of the same config except for the
// wall-time field: every reduction happens in fixed index order, and
// per-seed fan-out writes into pre-assigned slots before the ordered merge.

namespace acyc {

struct AssertionOutcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::string json;        // serialized report, as written to report.json
  bool converged = false;  // every iterative estimate stabilized
  bool allPassed = false;  // declared assertions only
  int exitCode = 0;        // 0 all assertions pass, 1 otherwise
  std::vector<AssertionOutcome> assertions;
  std::vector<std::string> artifacts;  // file names written next to the report
};

Report run(const ExperimentConfig& cfg, const std::string& outDir, int threads = 1);

struct GoldenEntry {
  std::string name;
  std::string file;        // under the bundled configs directory
  std::string subcommand;
  int expectedExit = 0;
  std::string note;
};

// bundled acceptance configs with their expected outcomes; fixed order
const std::vector<GoldenEntry>& list_golden();

}  // namespace acyc
