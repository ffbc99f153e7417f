#include "spdc/scans.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "spdc/errors.hpp"

namespace spdc::scan {

namespace {

std::string msg(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return buf;
}

// Resolves a ScanRange against the map lattice: returns start index,
// index stride and point count.
struct LatticeRange {
  std::size_t start;
  std::size_t stride;
  std::size_t count;
};

LatticeRange resolve(const corr::CoincidenceMap& map, ScanRange range) {
  if (range.hi < range.lo) throw config_error("scan range hi must be >= lo");
  double step = range.step == 0.0 ? map.dx() : range.step;
  const double cells = step / map.dx();
  const double rcells = std::round(cells);
  if (rcells < 1.0 || std::abs(cells - rcells) > 1e-6)
    throw config_error(msg("scan step %g m must be a positive multiple of dx = %g m", step, map.dx()));

  const std::size_t lo = map.index_of(range.lo);
  const std::size_t hi = map.index_of(range.hi);
  const auto stride = static_cast<std::size_t>(rcells);
  return LatticeRange{lo, stride, (hi - lo) / stride + 1};
}

}  // namespace

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::FixedD1: return "FixedD1";
    case Protocol::SameSense: return "SameSense";
    case Protocol::OppositeSense: return "OppositeSense";
    case Protocol::SinglesCalibration: return "SinglesCalibration";
  }
  return "?";
}

void ScanProfile::write_csv(std::ostream& os) const {
  char buf[64];
  os << "# protocol=" << to_string(protocol) << '\n';
  std::snprintf(buf, sizeof(buf), "%.17g", fixed_offset);
  os << "# fixed_offset_m=" << buf << '\n';
  os << "position_m,value\n";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", positions[i]);
    os << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    os << buf << '\n';
  }
}

ScanProfile scan_fixed_d1(const corr::CoincidenceMap& map, double d1_position, ScanRange range) {
  const std::size_t j = map.index_of(d1_position);
  const auto lat = resolve(map, range);

  ScanProfile p;
  p.protocol = Protocol::FixedD1;
  p.fixed_offset = d1_position;
  p.positions.reserve(lat.count);
  p.values.reserve(lat.count);
  for (std::size_t i = 0; i < lat.count; ++i) {
    const std::size_t k = lat.start + i * lat.stride;
    p.positions.push_back(map.x(k));
    p.values.push_back(map.at(j, k));
  }
  return p;
}

ScanProfile scan_same_sense(const corr::CoincidenceMap& map, ScanRange range, double fixed_lag) {
  const auto lat = resolve(map, range);
  const double lag_cells = fixed_lag / map.dx();
  const double rlag = std::round(lag_cells);
  if (std::abs(lag_cells - rlag) > 1e-6)
    throw config_error(msg("same-sense lag %g m is off-grid (dx = %g m)", fixed_lag, map.dx()));
  const auto lag = static_cast<long>(rlag);

  ScanProfile p;
  p.protocol = Protocol::SameSense;
  p.fixed_offset = fixed_lag;
  for (std::size_t i = 0; i < lat.count; ++i) {
    const std::size_t k = lat.start + i * lat.stride;
    const long j = static_cast<long>(k) + lag;
    if (j < 0 || j >= static_cast<long>(map.n()))
      throw config_error("same-sense D1 position leaves the map window; shrink the range or lag");
    p.positions.push_back(map.x(k));
    p.values.push_back(map.at(static_cast<std::size_t>(j), k));
  }
  return p;
}

ScanProfile scan_opposite_sense(const corr::CoincidenceMap& map, double center, ScanRange range) {
  const auto lat = resolve(map, range);
  const long c = static_cast<long>(map.index_of(center));

  ScanProfile p;
  p.protocol = Protocol::OppositeSense;
  p.fixed_offset = center;
  for (std::size_t i = 0; i < lat.count; ++i) {
    const std::size_t k = lat.start + i * lat.stride;
    const long j = 2 * c - static_cast<long>(k);  // mirror of the D2 index about center
    if (j < 0 || j >= static_cast<long>(map.n()))
      throw config_error("opposite-sense mirror position leaves the map window; shrink the range");
    p.positions.push_back(map.x(k));
    p.values.push_back(map.at(static_cast<std::size_t>(j), k));
  }
  return p;
}

ScanProfile scan_singles(const field::IntensityProfile& profile, ScanRange range) {
  if (range.hi < range.lo) throw config_error("scan range hi must be >= lo");
  const double dx = profile.grid.dx;
  double step = range.step == 0.0 ? dx : range.step;
  const double cells = step / dx;
  const double rcells = std::round(cells);
  if (rcells < 1.0 || std::abs(cells - rcells) > 1e-6)
    throw config_error(msg("scan step %g m must be a positive multiple of dx = %g m", step, dx));

  auto index_of = [&](double x) {
    const double t = (x - profile.grid.x0) / dx;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-6)
      throw config_error(msg("position %g m is off-grid; nearest grid point is %g m "
                             "(snap explicitly)",
                             x, profile.grid.x0 + r * dx));
    if (r < 0 || r >= static_cast<double>(profile.values.size()))
      throw config_error("scan range leaves the profile window");
    return static_cast<std::size_t>(r);
  };

  const std::size_t lo = index_of(range.lo);
  const std::size_t hi = index_of(range.hi);
  const auto stride = static_cast<std::size_t>(rcells);

  ScanProfile p;
  p.protocol = Protocol::SinglesCalibration;
  for (std::size_t k = lo; k <= hi; k += stride) {
    p.positions.push_back(profile.x(k));
    p.values.push_back(profile.values[k]);
  }
  return p;
}

Extremum profile_extremum(const ScanProfile& profile, FeatureKind kind) {
  if (profile.positions.empty()) throw config_error("profile_extremum on an empty profile");

  std::size_t best = 0;
  for (std::size_t i = 1; i < profile.positions.size(); ++i) {
    const double v = profile.values[i];
    const double bv = profile.values[best];
    bool take = (kind == FeatureKind::Dip) ? v < bv : v > bv;
    if (!take && v == bv) {
      const double p = profile.positions[i];
      const double bp = profile.positions[best];
      take = std::abs(p) < std::abs(bp) || (std::abs(p) == std::abs(bp) && p < bp);
    }
    if (take) best = i;
  }
  return Extremum{profile.positions[best], profile.values[best]};
}

double profile_width(const ScanProfile& profile, double threshold_fraction) {
  if (!(threshold_fraction > 0.0) || !(threshold_fraction < 1.0))
    throw config_error("threshold_fraction must lie strictly between 0 and 1");
  const std::size_t len = profile.positions.size();
  if (len < 5) throw config_error("profile too short for a width estimate");

  // Plateau: median of the outer 20% of samples (10% from each end).
  const std::size_t edge = std::max<std::size_t>(1, len / 10);
  std::vector<double> outer;
  outer.reserve(2 * edge);
  for (std::size_t i = 0; i < edge; ++i) outer.push_back(profile.values[i]);
  for (std::size_t i = len - edge; i < len; ++i) outer.push_back(profile.values[i]);
  std::nth_element(outer.begin(), outer.begin() + outer.size() / 2, outer.end());
  const double plateau = outer[outer.size() / 2];

  const auto [min_it, max_it] = std::minmax_element(profile.values.begin(), profile.values.end());
  // Whichever extremum departs further from the plateau defines the feature.
  const bool dip = (plateau - *min_it) >= (*max_it - plateau);
  const std::size_t ext = static_cast<std::size_t>((dip ? min_it : max_it) - profile.values.begin());
  const double extreme = profile.values[ext];
  if (extreme == plateau) throw config_error("profile has no feature: extremum equals plateau");

  const double level = extreme + threshold_fraction * (plateau - extreme);
  auto crossed = [&](double v) { return dip ? v >= level : v <= level; };

  double left = 0.0, right = 0.0;
  bool found_left = false, found_right = false;
  for (std::size_t i = ext; i-- > 0;) {
    if (crossed(profile.values[i])) {
      const double v0 = profile.values[i], v1 = profile.values[i + 1];
      const double t = (level - v0) / (v1 - v0);
      left = profile.positions[i] + t * (profile.positions[i + 1] - profile.positions[i]);
      found_left = true;
      break;
    }
  }
  for (std::size_t i = ext + 1; i < len; ++i) {
    if (crossed(profile.values[i])) {
      const double v0 = profile.values[i - 1], v1 = profile.values[i];
      const double t = (level - v0) / (v1 - v0);
      right = profile.positions[i - 1] + t * (profile.positions[i] - profile.positions[i - 1]);
      found_right = true;
      break;
    }
  }
  if (!found_left || !found_right)
    throw config_error("profile never crosses the width threshold on one side");
  return right - left;
}

double snap_to_grid(double x, double x0, double dx) {
  return x0 + std::round((x - x0) / dx) * dx;
}

}  // namespace spdc::scan
