#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace spdc::field {

/// Uniform 1D transverse grid. Sample k sits at x0 + k*dx (meters).
struct GridSpec {
  std::size_t n = 4096;
  double dx = 5e-6;
  double x0 = -0.5 * 4095 * 5e-6;

  /// Grid symmetric about 0: x0 = -(n-1)*dx/2. Coordinates come in +/- pairs,
  /// which makes coordinate inversion an exact index reversal.
  static GridSpec symmetric(std::size_t n, double dx) {
    return GridSpec{n, dx, -0.5 * static_cast<double>(n - 1) * dx};
  }
};

/// Complex scalar field sampled on a uniform transverse grid.
/// n must be a power of two (>= 2); dx and wavelength must be positive.
class FieldGrid {
 public:
  FieldGrid(GridSpec spec, std::vector<std::complex<double>> samples, double wavelength);

  std::size_t n() const { return spec_.n; }
  double dx() const { return spec_.dx; }
  double x0() const { return spec_.x0; }
  double wavelength() const { return wavelength_; }
  const GridSpec& grid() const { return spec_; }

  double x(std::size_t k) const { return spec_.x0 + static_cast<double>(k) * spec_.dx; }
  double window() const { return static_cast<double>(spec_.n) * spec_.dx; }

  const std::vector<std::complex<double>>& samples() const { return samples_; }
  std::vector<std::complex<double>>& samples() { return samples_; }

  /// True when x0 = -(n-1)*dx/2 up to 1e-9*dx.
  bool is_symmetric() const;

 private:
  GridSpec spec_;
  std::vector<std::complex<double>> samples_;
  double wavelength_;
};

/// Real non-negative intensity on the same grid as its source field.
struct IntensityProfile {
  std::vector<double> values;
  GridSpec grid;

  double x(std::size_t k) const { return grid.x0 + static_cast<double>(k) * grid.dx; }
};

/// Flat-phase Gaussian, samples[k] = exp(-x_k^2/waist^2). Unit amplitude at
/// x = 0 when the grid contains 0. Rejects waist < 4*dx (unresolvable) and
/// waist > n*dx/4 (window overflow).
FieldGrid make_gaussian(const GridSpec& spec, double waist, double wavelength);

/// Perfectly opaque wire: zeroes samples with |x - center| <= width/2.
/// Requires width > 2*dx. Idempotent.
FieldGrid apply_wire(const FieldGrid& field, double center, double width);

/// Ideal thin lens: multiplies by exp(-i*pi*x^2/(wavelength*focal_length)).
/// Pure phase element; pointwise intensity is unchanged.
FieldGrid apply_thin_lens(const FieldGrid& field, double focal_length);

/// Scalar angular-spectrum propagation with the paraxial transfer function
/// exp(-i*pi*wavelength*distance*f^2). Negative distance back-propagates.
/// Total power is conserved. Errors when the transfer-function phase would
/// be undersampled at f_max = 1/(2*dx); the message reports the maximum
/// safe distance n*dx^2/wavelength for the grid.
FieldGrid propagate(const FieldGrid& field, double distance);

/// Largest |distance| the sampling guard admits for this grid.
double max_safe_distance(const GridSpec& spec, double wavelength);

/// Reflection x -> -x. Exact index reversal; errors on asymmetric grids
/// where -x is not representable.
FieldGrid invert_coordinate(const FieldGrid& field);

/// values[k] = |samples[k]|^2.
IntensityProfile intensity(const FieldGrid& field);

/// Total power sum(|samples|^2)*dx.
double total_power(const FieldGrid& field);

/// Complex field linearly interpolated at x; 0 outside the grid window.
std::complex<double> sample_at(const FieldGrid& field, double x);

}  // namespace spdc::field
