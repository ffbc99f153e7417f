#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "spdc/errors.hpp"
#include "spdc/runner.hpp"
#include "spdc/setup.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spdcsim: transverse coincidence simulator for twin-beam optical benches"};

  std::string setup_path;
  std::string experiment, mode, out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false, svg = false;

  app.add_option("--setup", setup_path, "setup file (key = value lines)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--experiment", experiment,
                 "override experiment: Calibration|FixedD1|SameSense|OppositeSense|FullMap|"
                 "AntibunchReport|HomogeneityReport");
  app.add_option("--mode", mode, "override mode: analytic|montecarlo|both");
  app.add_option("--seed", seed, "override Monte Carlo seed")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--out", out_dir, "override output directory");
  app.add_flag("--svg", svg, "also emit SVG plots");

  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(setup_path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();

    auto spec = spdc::cli::parse_setup(text.str());
    if (!experiment.empty()) spec.experiment = spdc::cli::experiment_from_string(experiment);
    if (!mode.empty()) spec.mode = spdc::cli::mode_from_string(mode);
    if (seed_given) spec.seed = seed;
    if (!out_dir.empty()) spec.output_dir = out_dir;
    if (svg) spec.emit_svg = true;

    const auto result = spdc::cli::run(spec);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& c : result.checks)
      std::cout << "check " << c.name << ": " << (c.pass ? "PASS" : "FAIL") << "  # " << c.detail
                << '\n';
    std::cout << "report: " << result.report_path << '\n';
    return result.all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
