#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spdc/field.hpp"

namespace spdc::bench {

/// Thin wire dropped into the down-converted beam for the detector
/// alignment procedure (singles scan).
struct CalibrationWire {
  double width = 500e-6;
  double center = 0.0;
  double distance_to_detectors = 0.10;
};

/// Full optical-setup description. Defaults describe the reference bench:
/// 442 nm pump shaped by a 250 um wire and a 25 cm lens so the wire image
/// falls 75 cm past the crystal, degenerate 884 nm twins, 0.3 mm detector
/// slits, Dove prism in one arm.
struct BenchConfig {
  double pump_wavelength = 442e-9;
  double downconverted_wavelength = 884e-9;
  double pump_waist = 1e-3;
  double wire_width = 250e-6;  // 0 disables the wire
  double wire_center = 0.0;
  double wire_to_lens = 0.375;
  double lens_focal = 0.25;
  double lens_to_crystal = 0.0;  // crystal at the lens output by default
  double crystal_to_detectors = 0.75;
  bool dove_prism = true;
  double slit_width = 0.3e-3;
  double mu_s = 2.0;
  double mu_i = 2.0;
  std::optional<CalibrationWire> calibration_wire = CalibrationWire{};

  // Numerical grid. Propagation legs run on a grid padded by pad_factor and
  // the result is cropped back to grid_n samples, so the sampling guard can
  // hold for bench-scale distances while analysis stays on the small grid.
  std::size_t grid_n = 4096;
  double grid_dx = 5e-6;
  std::size_t pad_factor = 4;

  double singles_envelope_factor = 3.0;

  /// Output (analysis) grid, symmetric about 0.
  field::GridSpec grid() const { return field::GridSpec::symmetric(grid_n, grid_dx); }

  /// Lens magnification -z_i/z_o for the configured wire_to_lens leg.
  double magnification() const;

  /// Throws config_error on hard violations; returns soft warnings
  /// (e.g. non-degenerate downconverted wavelength).
  std::vector<std::string> validate() const;
};

BenchConfig default_config();

/// The effective pump profile W at the detection-equivalent plane plus the
/// correlation-argument metadata. parity = -1 iff the Dove prism is in.
struct PreparedState {
  field::FieldGrid pump_at_detection;
  int parity;
  double mu_s;
  double mu_i;
};

/// Runs the pump pipeline: gaussian -> wire -> propagate(wire_to_lens) ->
/// lens -> propagate(lens_to_crystal + crystal_to_detectors), on the padded
/// grid, cropped to the output grid. The Dove prism enters only through
/// parity; it acts on a down-converted arm, not on the pump.
PreparedState prepare_state(const BenchConfig& config);

/// Down-converted singles envelope for the calibration procedure: broad
/// gaussian at the down-converted wavelength, calibration wire, propagation
/// to the detectors. Requires calibration_wire.
field::IntensityProfile singles_envelope(const BenchConfig& config);

}  // namespace spdc::bench
