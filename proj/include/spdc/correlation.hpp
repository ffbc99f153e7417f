#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "spdc/bench.hpp"

namespace spdc::corr {

/// Coincidence rate C(rho1, rho2) on the detection-plane grid, arbitrary
/// units. Entry (j, k) pairs detector D1 at x_j with D2 at x_k.
class CoincidenceMap {
 public:
  CoincidenceMap(std::size_t n, double dx, double x0, int parity, double mu_s, double mu_i);

  std::size_t n() const { return n_; }
  double dx() const { return dx_; }
  double x0() const { return x0_; }
  double x(std::size_t k) const { return x0_ + static_cast<double>(k) * dx_; }
  int parity() const { return parity_; }
  double mu_s() const { return mu_s_; }
  double mu_i() const { return mu_i_; }

  double at(std::size_t j, std::size_t k) const { return values_[j * n_ + k]; }
  double& at(std::size_t j, std::size_t k) { return values_[j * n_ + k]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double total() const;

  /// Grid index of an on-grid position; errors when x is off-grid
  /// (callers snap explicitly) or outside the window.
  std::size_t index_of(double x) const;

  /// Dense CSV: header row of rho2 coordinates, first column rho1.
  void write_csv(std::ostream& os) const;

 private:
  std::size_t n_;
  double dx_;
  double x0_;
  int parity_;
  double mu_s_;
  double mu_i_;
  std::vector<double> values_;
};

struct AntibunchReport {
  double gamma_zero;  // mean of the diagonal over the analysis window
  double gamma_max;   // max over the window
  double delta_star;  // detector separation at the max (m)
  bool violated;      // gamma_max > gamma_zero
  double contrast;    // gamma_max / gamma_zero; +inf when gamma_zero == 0
};

/// values[j,k] = |W(x_j/mu_s + parity*x_k/mu_i)|^2 with W linearly
/// interpolated on its grid and 0 outside. No global normalization.
/// When mu_s == mu_i the argument depends only on the integer j + parity*k,
/// so equal-argument entries are bit-identical (exact translation /
/// anti-translation invariance on-grid).
CoincidenceMap coincidence_map(const bench::PreparedState& state);

/// Detector response: convolution with a normalized boxcar of width
/// slit_width independently along both axes, zero-padded at the edges.
/// Boundary cells of the boxcar get fractional weight so the kernel
/// integrates the continuous slit window exactly. Requires slit_width >= dx.
CoincidenceMap apply_detector_slits(const CoincidenceMap& map, double slit_width);

/// Same detector response for a 1D singles profile.
field::IntensityProfile apply_detector_slit(const field::IntensityProfile& profile,
                                            double slit_width);

/// Classical-bound test over |x| <= window/2 on both axes.
AntibunchReport antibunch_test(const CoincidenceMap& map, double window);

/// Max over the given diagonal shifts of the relative RMS difference
/// between the map and its (shift, shift) translate on the overlap window.
/// 0 means the map depends on the detector separation only. Shifts must be
/// grid-aligned and at most half the window.
double homogeneity_index(const CoincidenceMap& map, const std::vector<double>& shifts);

}  // namespace spdc::corr
