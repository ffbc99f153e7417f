#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spdc/bench.hpp"

namespace spdc::cli {

enum class Experiment {
  Calibration,
  FixedD1,
  SameSense,
  OppositeSense,
  FullMap,
  AntibunchReport,
  HomogeneityReport,
};

enum class Mode { Analytic, MonteCarlo, Both };

const char* to_string(Experiment e);
const char* to_string(Mode m);
Experiment experiment_from_string(const std::string& s);
Mode mode_from_string(const std::string& s);

/// One batch run: bench description plus protocol selection and outputs.
struct RunSpec {
  bench::BenchConfig bench;
  Experiment experiment = Experiment::FixedD1;
  Mode mode = Mode::Analytic;
  std::vector<double> d1_offsets = {0.0, 0.4e-3, -0.4e-3};
  std::size_t n_pairs = 1000000;
  std::uint64_t seed = 12345;
  std::string output_dir = "out";
  bool emit_svg = false;
  double analysis_window = 4e-3;

  void validate() const;
};

/// Parses the flat `key = value` setup format: one pair per line, `#`
/// comments, SI suffixes nm|um|mm|cm|m on lengths, booleans true|false.
/// Omitted keys keep their defaults; unknown keys are errors. Every
/// diagnostic carries the line number and offending token.
RunSpec parse_setup(const std::string& text);

/// Emits the same flat format; parse_setup(serialize_setup(s)) == s.
std::string serialize_setup(const RunSpec& spec);

}  // namespace spdc::cli
