#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spdc/correlation.hpp"
#include "spdc/field.hpp"

namespace spdc::scan {

enum class Protocol { FixedD1, SameSense, OppositeSense, SinglesCalibration };

const char* to_string(Protocol p);

/// Detector trajectory window. Positions run lo..hi inclusive in steps of
/// `step` (0 means the grid spacing). All three must be grid-aligned;
/// scans never snap silently.
struct ScanRange {
  double lo;
  double hi;
  double step = 0.0;
};

struct ScanProfile {
  std::vector<double> positions;  // the plotted detector's coordinate (m)
  std::vector<double> values;
  Protocol protocol = Protocol::FixedD1;
  double fixed_offset = 0.0;  // D1 position (FixedD1) or trajectory center (OppositeSense)

  /// 2-column CSV (position_m, value) with a `# protocol=...` header.
  void write_csv(std::ostream& os) const;
};

/// D2 scan with D1 parked at d1_position. values[k] = map(d1, positions[k]).
ScanProfile scan_fixed_d1(const corr::CoincidenceMap& map, double d1_position, ScanRange range);

/// Both detectors move together; fixed_lag keeps D1 at position + lag.
ScanProfile scan_same_sense(const corr::CoincidenceMap& map, ScanRange range, double fixed_lag = 0.0);

/// Detectors counter-propagate about `center`: D1 at 2*center - position,
/// plotted against the D2 position.
ScanProfile scan_opposite_sense(const corr::CoincidenceMap& map, double center, ScanRange range);

/// Singles-rate scan of an intensity profile (calibration procedure).
ScanProfile scan_singles(const field::IntensityProfile& profile, ScanRange range);

enum class FeatureKind { Dip, Peak };

struct Extremum {
  double position;
  double value;
};

/// Global minimum (Dip) or maximum (Peak). Ties break toward the position
/// closest to 0, then toward the negative one.
Extremum profile_extremum(const ScanProfile& profile, FeatureKind kind);

/// Full feature width where the profile crosses
/// extremum + threshold_fraction*(plateau - extremum); the plateau is the
/// median of the outer 20% of samples. Crossings are linearly interpolated.
/// Errors when a side never crosses.
double profile_width(const ScanProfile& profile, double threshold_fraction);

/// Nearest on-grid position to x for a grid with origin x0 and spacing dx.
double snap_to_grid(double x, double x0, double dx);

}  // namespace spdc::scan
