#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "spdc/correlation.hpp"
#include "spdc/scans.hpp"

namespace spdc::mc {

/// Beamsplitter outcome for one photon pair. Signal and idler carry
/// orthogonal polarizations, so they route independently with probability
/// 1/2 each; only the two Split outcomes produce a coincidence.
enum class Route : std::uint8_t { BothToD1 = 0, BothToD2 = 1, Split12 = 2, Split21 = 3 };

/// Photon-pair transverse positions with detector routing. rho1 is the
/// signal coordinate, rho2 the idler coordinate; Split12 sends the signal
/// to D1, Split21 swaps the detectors.
struct PairEventBatch {
  std::vector<double> rho1;
  std::vector<double> rho2;
  std::vector<Route> route;
  std::uint64_t seed = 0;
  std::size_t n_pairs = 0;
};

/// Draws (rho1, rho2) i.i.d. from the normalized map by inverse-CDF over
/// the flattened matrix, with uniform jitter inside each grid cell, then
/// routes each photon independently. Deterministic for a fixed seed.
PairEventBatch sample_pairs(const corr::CoincidenceMap& map, std::size_t n_pairs,
                            std::uint64_t seed);

/// Uniform lattice of detector placements: centers lo, lo+step, ..., <= hi.
struct BinSpec {
  double lo;
  double hi;
  double step;
};

struct CountsProfile {
  std::vector<double> positions;  // D2 bin centers (m)
  std::vector<std::uint64_t> counts;
  std::size_t n_pairs_total = 0;
  scan::Protocol protocol = scan::Protocol::FixedD1;
  std::uint64_t seed = 0;
  double slit_width = 0.0;

  /// CSV (position_m, counts, expected) with header comments recording
  /// seed, n_pairs and protocol. `expected` may be null.
  void write_csv(std::ostream& os, const std::vector<double>* expected = nullptr) const;
};

/// Bins coincidences under the protocol's paired slit windows. Each bin is
/// an independent detector placement, so an event lands in several bins
/// when step < slit_width (and sum(counts) <= n_pairs only holds for
/// non-overlapping windows). d1_position is the parked D1 slit center for
/// FixedD1 and the trajectory center for OppositeSense.
CountsProfile coincidence_counts(const PairEventBatch& batch, scan::Protocol protocol,
                                 double slit_width, BinSpec bins, double d1_position);

/// 2D histogram of coincidence events on a square bin lattice, as a
/// CoincidenceMap of counts (D1 coordinate indexes rows).
corr::CoincidenceMap binned_coincidence_map(const PairEventBatch& batch, BinSpec bins,
                                            int parity, double mu_s, double mu_i);

struct CompareResult {
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  double max_sigma = 0.0;
};

/// Pearson chi-square of MC counts against an analytic profile rescaled to
/// expected counts (scale = total counts / total analytic mass). Bins with
/// expected < 5 merge with their right neighbors. Variance is
/// max(expected, 1). Errors on mismatched position lattices.
CompareResult compare_profiles(const CountsProfile& mc, const scan::ScanProfile& analytic);

}  // namespace spdc::mc
