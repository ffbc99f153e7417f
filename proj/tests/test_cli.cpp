#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/runner.hpp"
#include "spdc/setup.hpp"
#include "spdc/svg.hpp"

using namespace spdc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void expect_same_spec(const cli::RunSpec& a, const cli::RunSpec& b) {
  CHECK(a.bench.pump_wavelength == b.bench.pump_wavelength);
  CHECK(a.bench.downconverted_wavelength == b.bench.downconverted_wavelength);
  CHECK(a.bench.pump_waist == b.bench.pump_waist);
  CHECK(a.bench.wire_width == b.bench.wire_width);
  CHECK(a.bench.wire_center == b.bench.wire_center);
  CHECK(a.bench.wire_to_lens == b.bench.wire_to_lens);
  CHECK(a.bench.lens_focal == b.bench.lens_focal);
  CHECK(a.bench.lens_to_crystal == b.bench.lens_to_crystal);
  CHECK(a.bench.crystal_to_detectors == b.bench.crystal_to_detectors);
  CHECK(a.bench.dove_prism == b.bench.dove_prism);
  CHECK(a.bench.slit_width == b.bench.slit_width);
  CHECK(a.bench.mu_s == b.bench.mu_s);
  CHECK(a.bench.mu_i == b.bench.mu_i);
  CHECK(a.bench.calibration_wire.has_value() == b.bench.calibration_wire.has_value());
  if (a.bench.calibration_wire && b.bench.calibration_wire) {
    CHECK(a.bench.calibration_wire->width == b.bench.calibration_wire->width);
    CHECK(a.bench.calibration_wire->center == b.bench.calibration_wire->center);
    CHECK(a.bench.calibration_wire->distance_to_detectors ==
          b.bench.calibration_wire->distance_to_detectors);
  }
  CHECK(a.bench.grid_n == b.bench.grid_n);
  CHECK(a.bench.grid_dx == b.bench.grid_dx);
  CHECK(a.bench.pad_factor == b.bench.pad_factor);
  CHECK(a.bench.singles_envelope_factor == b.bench.singles_envelope_factor);
  CHECK(a.experiment == b.experiment);
  CHECK(a.mode == b.mode);
  CHECK(a.d1_offsets == b.d1_offsets);
  CHECK(a.n_pairs == b.n_pairs);
  CHECK(a.seed == b.seed);
  CHECK(a.output_dir == b.output_dir);
  CHECK(a.emit_svg == b.emit_svg);
  CHECK(a.analysis_window == b.analysis_window);
}

// small bench so run() stays fast in unit tests
cli::RunSpec small_spec(const fs::path& out) {
  cli::RunSpec spec;
  spec.bench.grid_n = 1024;
  spec.bench.grid_dx = 20e-6;
  spec.output_dir = out.string();
  return spec;
}

fs::path fresh_dir(const char* name) {
  const fs::path p = fs::path("cli_out") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("length units parse to meters") {
  const auto spec = cli::parse_setup("wire_width = 250um\n");
  CHECK(spec.bench.wire_width == doctest::Approx(2.5e-4).epsilon(1e-15));

  const auto spec2 = cli::parse_setup("slit_width = 0.3mm\ncrystal_to_detectors=75cm\n");
  CHECK(spec2.bench.slit_width == doctest::Approx(0.3e-3).epsilon(1e-15));
  CHECK(spec2.bench.crystal_to_detectors == doctest::Approx(0.75).epsilon(1e-15));

  const auto spec3 = cli::parse_setup("pump_wavelength = 442nm\n");
  CHECK(spec3.bench.pump_wavelength == doctest::Approx(442e-9).epsilon(1e-15));
}

TEST_CASE("empty setup file yields the full default spec") {
  const auto spec = cli::parse_setup("");
  expect_same_spec(spec, cli::RunSpec{});
  CHECK(spec.experiment == cli::Experiment::FixedD1);
  CHECK(spec.mode == cli::Mode::Analytic);
  REQUIRE(spec.d1_offsets.size() == 3);
  CHECK(spec.d1_offsets[1] == doctest::Approx(0.4e-3).epsilon(1e-15));
}

TEST_CASE("diagnostics carry line numbers and offending tokens") {
  try {
    cli::parse_setup("wire_width = 250furlongs\n");
    FAIL("expected a unit error");
  } catch (const config_error& e) {
    const std::string what = e.what();
    CHECK(what.find("setup:1") != std::string::npos);
    CHECK(what.find("furlongs") != std::string::npos);
  }

  try {
    cli::parse_setup("# comment\n\npump_waist = 1mm\nwirewidth = 2mm\n");
    FAIL("expected an unknown-key error");
  } catch (const config_error& e) {
    const std::string what = e.what();
    CHECK(what.find("setup:4") != std::string::npos);
    CHECK(what.find("wirewidth") != std::string::npos);
  }

  CHECK_THROWS_AS(cli::parse_setup("pump_waist = 1\n"), config_error);       // missing unit
  CHECK_THROWS_AS(cli::parse_setup("pump_waist\n"), config_error);           // no '='
  CHECK_THROWS_AS(cli::parse_setup("dove_prism = yes\n"), config_error);     // bad bool
  CHECK_THROWS_AS(cli::parse_setup("experiment = Wiggle\n"), config_error);  // bad enum
  CHECK_THROWS_AS(cli::parse_setup("n_pairs = -3\n"), config_error);
  CHECK_THROWS_AS(cli::parse_setup("mu_s = 1.5x\n"), config_error);
}

TEST_CASE("comments, blanks and full-key files parse") {
  const std::string text =
      "# reference run\n"
      "dove_prism = false   # prism out\n"
      "\n"
      "experiment = SameSense\n"
      "mode = both\n"
      "d1_offsets = 0mm, +0.4mm, -0.4mm\n"
      "n_pairs = 5000\n"
      "seed = 99\n"
      "emit_svg = true\n"
      "analysis_window = 4mm\n"
      "calibration_wire = false\n";
  const auto spec = cli::parse_setup(text);
  CHECK_FALSE(spec.bench.dove_prism);
  CHECK(spec.experiment == cli::Experiment::SameSense);
  CHECK(spec.mode == cli::Mode::Both);
  CHECK(spec.n_pairs == 5000);
  CHECK(spec.seed == 99);
  CHECK(spec.emit_svg);
  CHECK_FALSE(spec.bench.calibration_wire.has_value());
  REQUIRE(spec.d1_offsets.size() == 3);
  CHECK(spec.d1_offsets[2] == doctest::Approx(-0.4e-3).epsilon(1e-15));
}

TEST_CASE("serialize/parse round-trips every representable field") {
  cli::RunSpec spec;
  SUBCASE("defaults") {}
  SUBCASE("modified") {
    spec.bench.dove_prism = false;
    spec.bench.wire_center = -1.2345e-4;
    spec.bench.mu_s = 2.5;
    spec.bench.mu_i = 3.25;
    spec.bench.grid_n = 2048;
    spec.bench.grid_dx = 7.5e-6;
    spec.bench.pad_factor = 8;
    spec.experiment = cli::Experiment::OppositeSense;
    spec.mode = cli::Mode::Both;
    spec.d1_offsets = {1.23456789e-4, -9.87654321e-5};
    spec.n_pairs = 31337;
    spec.seed = 0xDEADBEEF;
    spec.output_dir = "elsewhere";
    spec.emit_svg = true;
    spec.analysis_window = 3.3e-3;
  }
  SUBCASE("no calibration wire") { spec.bench.calibration_wire.reset(); }

  const auto round = cli::parse_setup(cli::serialize_setup(spec));
  expect_same_spec(round, spec);
}

TEST_CASE("run: Dove mode report and artifacts") {
  const auto out = fresh_dir("dove");
  const auto spec = small_spec(out);
  const auto result = cli::run(spec);

  CHECK(result.all_passed());
  CHECK(result.warnings.empty());

  const std::string report = slurp(out / "report.txt");
  CHECK(report.find("violated = true") != std::string::npos);
  CHECK(report.find("shift_sense = same") != std::string::npos);
  CHECK(report.find("homogeneity: PASS") != std::string::npos);
  CHECK(report.find("antibunching = true") != std::string::npos);
  CHECK(report.find("overall = PASS") != std::string::npos);

  CHECK(fs::exists(out / "FixedD1_analytic_+0.000mm.csv"));
  CHECK(fs::exists(out / "FixedD1_analytic_+0.400mm.csv"));
  CHECK(fs::exists(out / "FixedD1_analytic_-0.400mm.csv"));
}

TEST_CASE("run: removing the prism flips the sense and breaks homogeneity") {
  const auto out = fresh_dir("nodove");
  auto spec = small_spec(out);
  spec.bench.dove_prism = false;
  const auto result = cli::run(spec);

  CHECK(result.all_passed());  // the run demonstrates the expected physics
  const std::string report = slurp(out / "report.txt");
  CHECK(report.find("shift_sense = opposite") != std::string::npos);
  CHECK(report.find("homogeneity: FAIL") != std::string::npos);
  CHECK(report.find("antibunching = false") != std::string::npos);
}

TEST_CASE("run: byte-identical outputs for identical specs") {
  const auto out1 = fresh_dir("det1");
  const auto out2 = fresh_dir("det2");
  auto s1 = small_spec(out1);
  s1.mode = cli::Mode::Both;
  s1.n_pairs = 20000;
  auto s2 = s1;
  s2.output_dir = out2.string();

  REQUIRE(cli::run(s1).all_passed());
  REQUIRE(cli::run(s2).all_passed());

  for (const auto& entry : fs::directory_iterator(out1)) {
    const auto name = entry.path().filename();
    CAPTURE(name.string());
    CHECK(slurp(entry.path()) == slurp(out2 / name));
  }
}

TEST_CASE("run: Both mode compares MC against the analytic oracle") {
  const auto out = fresh_dir("both");
  auto spec = small_spec(out);
  spec.mode = cli::Mode::Both;
  spec.n_pairs = 20000;
  spec.seed = 4242;
  const auto result = cli::run(spec);

  CHECK(result.all_passed());
  CHECK(fs::exists(out / "FixedD1_montecarlo_+0.400mm.csv"));
  const std::string report = slurp(out / "report.txt");
  CHECK(report.find("[montecarlo]") != std::string::npos);
  CHECK(report.find("check mc_consistency: PASS") != std::string::npos);

  const std::string csv = slurp(out / "FixedD1_montecarlo_+0.000mm.csv");
  CHECK(csv.find("# seed=4242") != std::string::npos);
  CHECK(csv.find("# n_pairs=20000") != std::string::npos);
  CHECK(csv.find("position_m,counts,expected") != std::string::npos);
}

TEST_CASE("run: calibration experiment writes both singles scans") {
  const auto out = fresh_dir("calib");
  auto spec = small_spec(out);
  spec.experiment = cli::Experiment::Calibration;
  const auto result = cli::run(spec);

  CHECK(result.all_passed());
  CHECK(fs::exists(out / "Calibration_analytic_D1.csv"));
  CHECK(fs::exists(out / "Calibration_analytic_D2.csv"));
  CHECK(slurp(out / "Calibration_analytic_D1.csv") == slurp(out / "Calibration_analytic_D2.csv"));

  bool saw_calibration_check = false;
  for (const auto& c : result.checks)
    if (c.name == "calibration") saw_calibration_check = c.pass;
  CHECK(saw_calibration_check);
}

TEST_CASE("run: full map export is a dense window-cropped CSV") {
  const auto out = fresh_dir("fullmap");
  auto spec = small_spec(out);
  spec.experiment = cli::Experiment::FullMap;
  spec.analysis_window = 2e-3;
  REQUIRE(cli::run(spec).all_passed());

  const std::string csv = slurp(out / "FullMap_analytic_map.csv");
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  std::size_t cols = 0;
  for (char ch : header) cols += (ch == ',');
  CHECK(cols == 101);  // 2 mm window at 20 um spacing
}

TEST_CASE("run: SVG emission produces plots per CSV") {
  const auto out = fresh_dir("svg");
  auto spec = small_spec(out);
  spec.emit_svg = true;
  spec.d1_offsets = {0.0};
  REQUIRE(cli::run(spec).all_passed());
  CHECK(fs::exists(out / "FixedD1_analytic_+0.000mm.svg"));
  const std::string svg = slurp(out / "FixedD1_analytic_+0.000mm.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("position (mm)") != std::string::npos);
}

TEST_CASE("run: MC applies to scan protocols only") {
  auto spec = small_spec(fresh_dir("mcbad"));
  spec.experiment = cli::Experiment::Calibration;
  spec.mode = cli::Mode::MonteCarlo;
  CHECK_THROWS_AS(cli::run(spec), config_error);
}

TEST_CASE("run: failures remove partial outputs") {
  const auto out = fresh_dir("cleanup");
  // report.txt is written last; making it unwritable forces a late failure
  fs::create_directories(out / "report.txt");
  auto spec = small_spec(out);
  CHECK_THROWS(cli::run(spec));

  std::size_t csvs = 0;
  for (const auto& entry : fs::directory_iterator(out))
    if (entry.path().extension() == ".csv") ++csvs;
  CHECK(csvs == 0);
}

TEST_CASE("svg writers validate input") {
  scan::ScanProfile empty;
  CHECK_THROWS_AS(svg::write_scan_svg(empty, "unused.svg", "t"), config_error);

  mc::CountsProfile counts;
  counts.positions = {0.0, 1e-3, 2e-3};
  counts.counts = {4, 9, 1};
  const auto out = fresh_dir("svg2");
  svg::write_counts_svg(counts, (out / "counts.svg").string(), "counts");
  const std::string svg = slurp(out / "counts.svg");
  CHECK(svg.find("circle") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("spdcsim binary end-to-end") {
  const char* bin = std::getenv("SPDCSIM_BIN");
  if (bin == nullptr) return;  // only wired up under ctest

  const auto out = fresh_dir("exe");
  const auto setup = out / "run.setup";
  {
    std::ofstream os(setup);
    os << "grid_n = 1024\ngrid_dx = 20um\nd1_offsets = 0mm\n";
  }
  const std::string cmd = std::string(bin) + " --setup " + setup.string() + " --out " +
                          (out / "results").string() + " > " + (out / "stdout.txt").string();
  const int rc = std::system(cmd.c_str());
  CHECK(rc == 0);
  CHECK(fs::exists(out / "results" / "report.txt"));
  const std::string stdout_text = slurp(out / "stdout.txt");
  CHECK(stdout_text.find("check constancy: PASS") != std::string::npos);
}
