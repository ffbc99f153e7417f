#include "spdc/bench.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "spdc/errors.hpp"

namespace spdc::bench {

namespace {

bool power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

field::GridSpec padded_grid(const BenchConfig& c) {
  return field::GridSpec::symmetric(c.grid_n * c.pad_factor, c.grid_dx);
}

field::FieldGrid crop_centered(const field::FieldGrid& f, std::size_t n_out) {
  if (n_out == f.n()) return f;
  const std::size_t offset = (f.n() - n_out) / 2;
  std::vector<std::complex<double>> s(f.samples().begin() + static_cast<std::ptrdiff_t>(offset),
                                      f.samples().begin() + static_cast<std::ptrdiff_t>(offset + n_out));
  // Both grids are symmetric with the same dx, so recompute x0 directly
  // instead of accumulating offset*dx rounding.
  return field::FieldGrid(field::GridSpec::symmetric(n_out, f.dx()), std::move(s), f.wavelength());
}

field::FieldGrid propagate_leg(const field::FieldGrid& f, double distance, const char* leg) {
  try {
    return field::propagate(f, distance);
  } catch (const config_error& e) {
    throw config_error(std::string(leg) + ": " + e.what());
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0)) throw config_error(std::string(name) + " must be > 0");
}

}  // namespace

double BenchConfig::magnification() const {
  const double zo = wire_to_lens;
  const double inv_zi = 1.0 / lens_focal - 1.0 / zo;
  if (inv_zi <= 0.0)
    throw config_error("wire_to_lens must exceed lens_focal to form a real wire image");
  return -(1.0 / inv_zi) / zo;
}

std::vector<std::string> BenchConfig::validate() const {
  require_positive(pump_wavelength, "pump_wavelength");
  require_positive(downconverted_wavelength, "downconverted_wavelength");
  require_positive(pump_waist, "pump_waist");
  if (wire_width < 0) throw config_error("wire_width must be >= 0 (0 disables the wire)");
  require_positive(wire_to_lens, "wire_to_lens");
  require_positive(lens_focal, "lens_focal");
  if (lens_to_crystal < 0) throw config_error("lens_to_crystal must be >= 0");
  require_positive(crystal_to_detectors, "crystal_to_detectors");
  require_positive(slit_width, "slit_width");
  require_positive(mu_s, "mu_s");
  require_positive(mu_i, "mu_i");
  require_positive(grid_dx, "grid_dx");
  if (!power_of_two(grid_n) || grid_n < 2)
    throw config_error("grid_n must be a power of two >= 2");
  if (!power_of_two(pad_factor))
    throw config_error("grid_pad_factor must be a power of two >= 1");
  if (singles_envelope_factor < 2.0)
    throw config_error("singles_envelope_factor must be >= 2 so the envelope stays broad");
  if (calibration_wire) {
    require_positive(calibration_wire->width, "calibration_wire_width");
    require_positive(calibration_wire->distance_to_detectors, "calibration_wire_distance");
  }

  std::vector<std::string> warnings;
  const double degenerate = 2.0 * pump_wavelength;
  if (std::abs(downconverted_wavelength - degenerate) > 1e-12 * degenerate) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "downconverted_wavelength %g m is not the degenerate 2*pump_wavelength = %g m",
                  downconverted_wavelength, degenerate);
    warnings.emplace_back(buf);
  }
  return warnings;
}

BenchConfig default_config() { return BenchConfig{}; }

PreparedState prepare_state(const BenchConfig& config) {
  config.validate();

  if (config.wire_width > 0) {
    // The wire image must land exactly at the detection-equivalent plane;
    // that constraint, not the individual legs, fixes the coincidence shape.
    const double inv_zi = 1.0 / config.lens_focal - 1.0 / config.wire_to_lens;
    if (inv_zi <= 0.0)
      throw config_error("wire_to_lens must exceed lens_focal to form a real wire image");
    const double zi = 1.0 / inv_zi;
    const double leg = config.lens_to_crystal + config.crystal_to_detectors;
    if (std::abs(zi - leg) > 1e-6 * std::max(zi, 1.0)) {
      char buf[200];
      std::snprintf(buf, sizeof(buf),
                    "wire image forms %g m past the lens but lens_to_crystal + "
                    "crystal_to_detectors = %g m; move a leg so the image falls at the detectors",
                    zi, leg);
      throw config_error(buf);
    }
  }

  auto f = field::make_gaussian(padded_grid(config), config.pump_waist, config.pump_wavelength);
  if (config.wire_width > 0) f = field::apply_wire(f, config.wire_center, config.wire_width);
  f = propagate_leg(f, config.wire_to_lens, "pump leg wire->lens");
  f = field::apply_thin_lens(f, config.lens_focal);
  f = propagate_leg(f, config.lens_to_crystal + config.crystal_to_detectors,
                    "pump leg lens->detection plane");
  f = crop_centered(f, config.grid_n);

  return PreparedState{std::move(f), config.dove_prism ? -1 : +1, config.mu_s, config.mu_i};
}

field::IntensityProfile singles_envelope(const BenchConfig& config) {
  config.validate();
  if (!config.calibration_wire)
    throw config_error("singles_envelope needs calibration_wire in the config");

  const auto& cal = *config.calibration_wire;
  auto f = field::make_gaussian(padded_grid(config),
                                config.singles_envelope_factor * config.pump_waist,
                                config.downconverted_wavelength);
  f = field::apply_wire(f, cal.center, cal.width);
  f = propagate_leg(f, cal.distance_to_detectors, "calibration leg wire->detectors");
  f = crop_centered(f, config.grid_n);
  return field::intensity(f);
}

}  // namespace spdc::bench
