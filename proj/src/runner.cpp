#include "spdc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/montecarlo.hpp"
#include "spdc/svg.hpp"

namespace fs = std::filesystem;

namespace spdc::cli {

namespace {

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string offset_token(double offset_m) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.3fmm", offset_m * 1e3);
  return buf;
}

constexpr double kHomogeneousThreshold = 1e-6;
constexpr double kConstancyThreshold = 1e-9;
constexpr double kMcPThreshold = 1e-3;

struct ShiftRow {
  double offset_nominal;
  double d1_snapped;
  double dip_position;
  double expected_position;
};

}  // namespace

bool RunResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

RunResult run(const RunSpec& spec) {
  spec.validate();
  const bool mc_wanted = spec.mode != Mode::Analytic;
  const bool scan_experiment = spec.experiment == Experiment::FixedD1 ||
                               spec.experiment == Experiment::SameSense ||
                               spec.experiment == Experiment::OppositeSense;
  if (mc_wanted && !scan_experiment)
    throw config_error(std::string("experiment ") + to_string(spec.experiment) +
                       " runs in analytic mode only");

  RunResult result;
  result.warnings = spec.bench.validate();

  const fs::path dir(spec.output_dir);
  fs::create_directories(dir);

  std::vector<fs::path> written;
  auto write_text = [&](const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    {
      std::ofstream os(p, std::ios::binary);
      if (!os) throw io_error("cannot open '" + p.string() + "' for writing");
      os << content;
      if (!os) throw io_error("failed writing '" + p.string() + "'");
    }
    written.push_back(p);
    result.files_written.push_back(p.string());
    return p;
  };

  try {
    const auto state = bench::prepare_state(spec.bench);
    const auto map_raw = corr::coincidence_map(state);
    const auto map_slit = corr::apply_detector_slits(map_raw, spec.bench.slit_width);

    const double dx = map_raw.dx();
    const double x0 = map_raw.x0();
    auto sn = [&](double x) { return scan::snap_to_grid(x, x0, dx); };

    const double half = spec.analysis_window / 2.0;
    const scan::ScanRange full_range{sn(-half), sn(half), 0.0};
    // Counter-propagating scans advance the correlation argument twice as
    // fast, so half the detector range covers the same feature window.
    const scan::ScanRange half_range{sn(-half / 2.0), sn(half / 2.0), 0.0};

    // ---- shift table (slit-convolved map, like the measured profiles) ----
    std::vector<ShiftRow> shifts;
    std::vector<scan::ScanProfile> fixed_profiles;
    for (double offset : spec.d1_offsets) {
      const double d1 = sn(offset);
      auto profile = scan_fixed_d1(map_slit, d1, full_range);
      const auto ext = profile_extremum(profile, scan::FeatureKind::Dip);
      const double expected = (state.parity == -1) ? offset : -offset;
      shifts.push_back(ShiftRow{offset, d1, ext.position, expected});
      fixed_profiles.push_back(std::move(profile));
    }

    bool shifts_ok = true;
    std::size_t same_votes = 0, opposite_votes = 0;
    for (const auto& row : shifts) {
      if (std::abs(row.dip_position - row.expected_position) > dx * (1.0 + 1e-9))
        shifts_ok = false;
      if (std::abs(row.offset_nominal) > dx) {
        if (std::abs(row.dip_position - row.offset_nominal) <= dx * (1.0 + 1e-9)) ++same_votes;
        if (std::abs(row.dip_position + row.offset_nominal) <= dx * (1.0 + 1e-9)) ++opposite_votes;
      }
    }
    const char* measured_sense = "undetermined";
    if (same_votes > 0 && opposite_votes == 0) measured_sense = "same";
    if (opposite_votes > 0 && same_votes == 0) measured_sense = "opposite";
    const char* expected_sense = (state.parity == -1) ? "same" : "opposite";
    // The sense is observable only when some offset actually moved D1.
    const bool sense_known = (same_votes + opposite_votes) > 0;

    // ---- constancy of the parity-matched simultaneous scan (raw map) ----
    const auto constant_scan = (state.parity == -1)
                                   ? scan_same_sense(map_raw, full_range)
                                   : scan_opposite_sense(map_raw, sn(0.0), full_range);
    const auto [cmin_it, cmax_it] =
        std::minmax_element(constant_scan.values.begin(), constant_scan.values.end());
    double csum = 0.0;
    for (double v : constant_scan.values) csum += v;
    const double cmean = csum / static_cast<double>(constant_scan.values.size());
    const double constancy_spread = (cmean > 0.0) ? (*cmax_it - *cmin_it) / cmean : 0.0;

    // ---- factor-2 width comparison (slit-convolved map) ----
    const auto fixed_reference = scan_fixed_d1(map_slit, sn(0.0), full_range);
    const auto counter_scan = (state.parity == -1)
                                  ? scan_opposite_sense(map_slit, sn(0.0), half_range)
                                  : scan_same_sense(map_slit, half_range);
    const double fwhm_fixed = profile_width(fixed_reference, 0.5);
    const double fwhm_counter = profile_width(counter_scan, 0.5);
    const double width_ratio = fwhm_counter / fwhm_fixed;

    // ---- antibunch + homogeneity ----
    const auto report = corr::antibunch_test(map_slit, spec.analysis_window);
    std::vector<double> homog_shifts;
    for (double s : {0.25e-3, 0.5e-3, 1.0e-3}) {
      const double cells = std::round(s / dx);
      if (cells >= 1.0 && cells <= static_cast<double>(map_raw.n() / 2))
        for (double sign : {1.0, -1.0}) homog_shifts.push_back(sign * cells * dx);
    }
    if (homog_shifts.empty()) homog_shifts.push_back(dx);
    const double homog = corr::homogeneity_index(map_raw, homog_shifts);
    const bool homogeneous = homog < kHomogeneousThreshold;
    const bool antibunching = report.violated && homogeneous;

    result.checks.push_back({"constancy",
                             constancy_spread < kConstancyThreshold,
                             "relative spread " + fmt_g(constancy_spread) + " (" +
                                 to_string(constant_scan.protocol) + ", pre-slit)"});
    result.checks.push_back({"shift_sense",
                             shifts_ok && (!sense_known || std::string(measured_sense) == expected_sense),
                             std::string("measured ") + measured_sense + ", expected " +
                                 expected_sense});
    result.checks.push_back({"width_ratio",
                             std::abs(width_ratio - 0.5) <= 0.05,
                             fmt_g(width_ratio) + " vs 0.5 +- 10%"});

    // ---- experiment outputs ----
    std::optional<scan::ScanProfile> singles_profile;
    std::optional<scan::Extremum> singles_dip;

    auto write_scan_csv = [&](const scan::ScanProfile& p, const std::string& base,
                              const std::string& title) {
      std::ostringstream os;
      p.write_csv(os);
      write_text(base + ".csv", os.str());
      if (spec.emit_svg) {
        svg::write_scan_svg(p, (dir / (base + ".svg")).string(), title);
        written.push_back(dir / (base + ".svg"));
        result.files_written.push_back((dir / (base + ".svg")).string());
      }
    };

    if (spec.mode != Mode::MonteCarlo) {
      switch (spec.experiment) {
        case Experiment::FixedD1: {
          for (std::size_t i = 0; i < shifts.size(); ++i) {
            const std::string tok = offset_token(shifts[i].offset_nominal);
            write_scan_csv(fixed_profiles[i], "FixedD1_analytic_" + tok,
                           "FixedD1 d1=" + tok + " (analytic)");
          }
          break;
        }
        case Experiment::SameSense: {
          const auto p = (state.parity == -1) ? constant_scan : counter_scan;
          write_scan_csv(p, "SameSense_analytic_+0.000mm", "SameSense (analytic)");
          break;
        }
        case Experiment::OppositeSense: {
          const auto p = (state.parity == -1) ? counter_scan : constant_scan;
          write_scan_csv(p, "OppositeSense_analytic_+0.000mm", "OppositeSense (analytic)");
          break;
        }
        case Experiment::Calibration: {
          // Singles are recorded through the detector slit, which merges the
          // near-field twin diffraction minima into one centered dip.
          const auto singles =
              corr::apply_detector_slit(bench::singles_envelope(spec.bench), spec.bench.slit_width);
          const double c = sn(spec.bench.calibration_wire->center);
          const scan::ScanRange cal_range{sn(c - half), sn(c + half), 0.0};
          singles_profile = scan_singles(singles, cal_range);
          singles_dip = profile_extremum(*singles_profile, scan::FeatureKind::Dip);
          // Both detectors look at the same recombined beam, so D1 and D2
          // singles scans coincide.
          write_scan_csv(*singles_profile, "Calibration_analytic_D1", "Calibration singles D1");
          write_scan_csv(*singles_profile, "Calibration_analytic_D2", "Calibration singles D2");
          const double err = std::abs(singles_dip->position - spec.bench.calibration_wire->center);
          result.checks.push_back({"calibration",
                                   err <= dx * (1.0 + 1e-9),
                                   "common dip at " + fmt_g(singles_dip->position) + " m, wire at " +
                                       fmt_g(spec.bench.calibration_wire->center) + " m"});
          break;
        }
        case Experiment::FullMap: {
          // Crop to the analysis window; the full default lattice would be a
          // multi-hundred-MB CSV.
          const std::size_t jlo = map_raw.index_of(sn(-half));
          const std::size_t jhi = map_raw.index_of(sn(half));
          corr::CoincidenceMap sub(jhi - jlo + 1, dx, map_raw.x(jlo), map_raw.parity(),
                                   map_raw.mu_s(), map_raw.mu_i());
          for (std::size_t j = jlo; j <= jhi; ++j)
            for (std::size_t k = jlo; k <= jhi; ++k) sub.at(j - jlo, k - jlo) = map_raw.at(j, k);
          std::ostringstream os;
          sub.write_csv(os);
          write_text("FullMap_analytic_map.csv", os.str());
          break;
        }
        case Experiment::AntibunchReport:
        case Experiment::HomogeneityReport:
          break;
      }
    }

    // ---- Monte Carlo ----
    struct McRow {
      std::string label;
      mc::CompareResult cmp;
      bool compared;
    };
    std::vector<McRow> mc_rows;
    if (mc_wanted) {
      const double step = std::max(1.0, std::round(spec.bench.slit_width / dx)) * dx;
      const double lo = sn(-half);
      const std::size_t nb =
          static_cast<std::size_t>(std::floor((sn(half) - lo) / step + 1e-9)) + 1;
      const double hi_center = lo + static_cast<double>(nb - 1) * step;
      const mc::BinSpec bins{lo, hi_center, step};
      const scan::ScanRange bin_range{lo, hi_center, step};

      auto run_one = [&](scan::Protocol protocol, double d1, const std::string& tok,
                         std::uint64_t seed) {
        const auto batch = mc::sample_pairs(map_raw, spec.n_pairs, seed);
        const auto counts = mc::coincidence_counts(batch, protocol, spec.bench.slit_width, bins, d1);
        scan::ScanProfile analytic;
        switch (protocol) {
          case scan::Protocol::FixedD1: analytic = scan_fixed_d1(map_slit, d1, bin_range); break;
          case scan::Protocol::SameSense: analytic = scan_same_sense(map_slit, bin_range); break;
          case scan::Protocol::OppositeSense:
            analytic = scan_opposite_sense(map_slit, d1, bin_range);
            break;
          case scan::Protocol::SinglesCalibration: break;
        }

        double total_mc = 0.0, total_an = 0.0;
        for (auto c : counts.counts) total_mc += static_cast<double>(c);
        for (double v : analytic.values) total_an += v;
        std::vector<double> expected(analytic.values.size(), 0.0);
        if (total_an > 0.0)
          for (std::size_t i = 0; i < expected.size(); ++i)
            expected[i] = analytic.values[i] * total_mc / total_an;

        const std::string base =
            std::string(scan::to_string(protocol)) + "_montecarlo_" + tok;
        std::ostringstream os;
        counts.write_csv(os, &expected);
        write_text(base + ".csv", os.str());
        if (spec.emit_svg) {
          svg::write_counts_svg(counts, (dir / (base + ".svg")).string(),
                                std::string(scan::to_string(protocol)) + " " + tok +
                                    " (montecarlo)");
          written.push_back(dir / (base + ".svg"));
          result.files_written.push_back((dir / (base + ".svg")).string());
        }

        McRow row{std::string(scan::to_string(protocol)) + " " + tok, {}, false};
        if (spec.mode == Mode::Both) {
          row.cmp = mc::compare_profiles(counts, analytic);
          row.compared = true;
        }
        mc_rows.push_back(row);
      };

      if (spec.experiment == Experiment::FixedD1) {
        for (std::size_t i = 0; i < shifts.size(); ++i)
          run_one(scan::Protocol::FixedD1, shifts[i].d1_snapped,
                  offset_token(shifts[i].offset_nominal), spec.seed + i);
      } else if (spec.experiment == Experiment::SameSense) {
        run_one(scan::Protocol::SameSense, 0.0, "+0.000mm", spec.seed);
      } else {
        run_one(scan::Protocol::OppositeSense, sn(0.0), "+0.000mm", spec.seed);
      }

      if (spec.mode == Mode::Both) {
        bool all_ok = true;
        std::string detail;
        for (const auto& row : mc_rows) {
          if (!row.compared) continue;
          if (row.cmp.p_value < kMcPThreshold) all_ok = false;
          if (!detail.empty()) detail += "; ";
          detail += row.label + " p=" + fmt_g(row.cmp.p_value);
        }
        result.checks.push_back({"mc_consistency", all_ok, detail});
      }
    }

    // ---- report.txt ----
    std::ostringstream rep;
    rep << "# spdcsim report\n";
    rep << "experiment = " << to_string(spec.experiment) << '\n';
    rep << "mode = " << to_string(spec.mode) << '\n';
    rep << "dove_prism = " << (spec.bench.dove_prism ? "true" : "false") << '\n';
    rep << "parity = " << state.parity << '\n';
    if (spec.bench.wire_width > 0)
      rep << "magnification = " << fmt_g(spec.bench.magnification()) << '\n';
    rep << "grid_n = " << spec.bench.grid_n << '\n';
    rep << "grid_dx_m = " << fmt_g(dx) << '\n';
    if (mc_wanted) {
      rep << "n_pairs = " << spec.n_pairs << '\n';
      rep << "seed = " << spec.seed << '\n';
    }

    rep << "\n[antibunch]  # slit-convolved map, window " << fmt_g(spec.analysis_window) << " m\n";
    rep << "gamma_zero = " << fmt_g(report.gamma_zero) << '\n';
    rep << "gamma_max = " << fmt_g(report.gamma_max) << '\n';
    rep << "delta_star_m = " << fmt_g(report.delta_star) << '\n';
    rep << "violated = " << (report.violated ? "true" : "false") << '\n';
    rep << "contrast = " << fmt_g(report.contrast) << '\n';

    rep << "\n[homogeneity]  # raw map, diagonal shifts\n";
    rep << "homogeneity_index = " << fmt_g(homog) << '\n';
    rep << "homogeneity: " << (homogeneous ? "PASS" : "FAIL") << "  # threshold "
        << fmt_g(kHomogeneousThreshold) << '\n';
    rep << "antibunching = " << (antibunching ? "true" : "false")
        << "  # violated AND homogeneous\n";

    rep << "\n[shift table]  # slit-convolved map\n";
    rep << "# offset_m, d1_snapped_m, dip_m, expected_m\n";
    for (const auto& row : shifts)
      rep << fmt_g(row.offset_nominal) << ", " << fmt_g(row.d1_snapped) << ", "
          << fmt_g(row.dip_position) << ", " << fmt_g(row.expected_position) << '\n';
    rep << "shift_sense = " << measured_sense << '\n';

    rep << "\n[widths]\n";
    rep << "fwhm_fixed_d1_m = " << fmt_g(fwhm_fixed) << '\n';
    rep << "fwhm_counter_scan_m = " << fmt_g(fwhm_counter) << '\n';
    rep << "width_ratio = " << fmt_g(width_ratio) << '\n';

    if (singles_dip) {
      rep << "\n[calibration]\n";
      rep << "singles_dip_m = " << fmt_g(singles_dip->position) << '\n';
    }

    if (!mc_rows.empty()) {
      rep << "\n[montecarlo]\n";
      for (const auto& row : mc_rows) {
        rep << row.label;
        if (row.compared)
          rep << ": chi2 = " << fmt_g(row.cmp.chi2) << ", dof = " << row.cmp.dof
              << ", p = " << fmt_g(row.cmp.p_value) << ", max_sigma = "
              << fmt_g(row.cmp.max_sigma);
        rep << '\n';
      }
    }

    rep << "\n[checks]\n";
    for (const auto& c : result.checks)
      rep << "check " << c.name << ": " << (c.pass ? "PASS" : "FAIL") << "  # " << c.detail
          << '\n';
    rep << "overall = " << (result.all_passed() ? "PASS" : "FAIL") << '\n';

    result.report_path = write_text("report.txt", rep.str()).string();
  } catch (...) {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    throw;
  }

  return result;
}

}  // namespace spdc::cli
