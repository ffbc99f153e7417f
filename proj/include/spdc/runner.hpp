#pragma once

#include <string>
#include <vector>

#include "spdc/setup.hpp"

namespace spdc::cli {

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

struct RunResult {
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;
  std::vector<std::string> files_written;
  std::string report_path;

  bool all_passed() const;
};

/// Executes the requested experiment: bench -> correlation -> scans
/// (-> montecarlo -> compare), writing one CSV per protocol/offset plus
/// report.txt into spec.output_dir. Any module error aborts the run and
/// removes the files written so far. The returned checks decide the CLI
/// exit status: 0 iff every check passed.
RunResult run(const RunSpec& spec);

}  // namespace spdc::cli
