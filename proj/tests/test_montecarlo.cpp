#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spdc/errors.hpp"
#include "spdc/montecarlo.hpp"

using namespace spdc;
using scan::Protocol;

namespace {

// Smooth difference-coordinate map with an antibunched notch; cheap to
// sample and exactly exchange-symmetric.
const corr::CoincidenceMap& synthetic_map() {
  static const corr::CoincidenceMap map = [] {
    const std::size_t n = 128;
    const double dx = 5e-5;
    corr::CoincidenceMap m(n, dx, -0.5 * static_cast<double>(n - 1) * dx, -1, 2.0, 2.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const double u = 0.5 * (m.x(j) - m.x(k));
        const double env = std::exp(-u * u / (1.5e-3 * 1.5e-3));
        const double notch = 1.0 - std::exp(-u * u / (0.3e-3 * 0.3e-3));
        m.at(j, k) = env * notch;
      }
    }
    return m;
  }();
  return map;
}

double snap0(const corr::CoincidenceMap& m) { return scan::snap_to_grid(0.0, m.x0(), m.dx()); }

// Non-overlapping detector placements: step == slit width.
mc::BinSpec default_bins(const corr::CoincidenceMap& m, double slit) {
  const double lo = scan::snap_to_grid(-2.5e-3, m.x0(), m.dx());
  const std::size_t nb = static_cast<std::size_t>(std::floor((5e-3) / slit)) + 1;
  return mc::BinSpec{lo, lo + static_cast<double>(nb - 1) * slit, slit};
}

scan::ScanProfile analytic_at_bins(const corr::CoincidenceMap& slit_map, double d1,
                                   const mc::BinSpec& bins) {
  return scan::scan_fixed_d1(slit_map, d1, {bins.lo, bins.hi, bins.step});
}

}  // namespace

TEST_CASE("identical seeds reproduce batches and counts bit for bit") {
  const auto& map = synthetic_map();
  const auto a = mc::sample_pairs(map, 20000, 42);
  const auto b = mc::sample_pairs(map, 20000, 42);
  CHECK(a.rho1 == b.rho1);
  CHECK(a.rho2 == b.rho2);
  CHECK(a.route == b.route);

  const double slit = 3 * map.dx();
  const auto bins = default_bins(map, slit);
  const auto ca = mc::coincidence_counts(a, Protocol::FixedD1, slit, bins, snap0(map));
  const auto cb = mc::coincidence_counts(b, Protocol::FixedD1, slit, bins, snap0(map));
  CHECK(ca.counts == cb.counts);

  const auto c = mc::sample_pairs(map, 20000, 43);
  CHECK(a.rho1 != c.rho1);
}

TEST_CASE("routing is an independent fair coin per photon") {
  const auto& map = synthetic_map();
  const std::size_t n = 1000000;
  const auto batch = mc::sample_pairs(map, n, 7);

  std::size_t freq[4] = {0, 0, 0, 0};
  for (auto r : batch.route) ++freq[static_cast<int>(r)];

  const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(n));
  for (int r = 0; r < 4; ++r) {
    const double f = static_cast<double>(freq[r]) / static_cast<double>(n);
    CHECK(std::abs(f - 0.25) < 4.0 * sigma);
  }
  const double split = static_cast<double>(freq[2] + freq[3]) / static_cast<double>(n);
  CHECK(split == doctest::Approx(0.5).epsilon(0.004));
}

TEST_CASE("sampling needs positive mass and at least one pair") {
  corr::CoincidenceMap zero(16, 1e-5, 0.0, -1, 2.0, 2.0);
  CHECK_THROWS_AS(mc::sample_pairs(zero, 100, 1), config_error);
  CHECK_THROWS_AS(mc::sample_pairs(synthetic_map(), 0, 1), config_error);
}

TEST_CASE("samples stay inside their cells and respect the map support") {
  const auto& map = synthetic_map();
  const auto batch = mc::sample_pairs(map, 50000, 11);
  const double lo = map.x0() - 0.5 * map.dx();
  const double hi = map.x(map.n() - 1) + 0.5 * map.dx();
  for (std::size_t i = 0; i < batch.n_pairs; i += 97) {
    CHECK(batch.rho1[i] >= lo);
    CHECK(batch.rho1[i] <= hi);
    CHECK(batch.rho2[i] >= lo);
    CHECK(batch.rho2[i] <= hi);
    // the diagonal has zero mass: jittered pairs never coincide closely
    CHECK(std::abs(batch.rho1[i] - batch.rho2[i]) < 6.5e-3);
  }
}

TEST_CASE("difference histogram matches the tri-smoothed analytic marginal") {
  const auto& map = synthetic_map();
  const std::size_t n = map.n();
  const std::size_t npairs = 1000000;
  const auto batch = mc::sample_pairs(map, npairs, 2024);

  // Oracle: anti-diagonal reduction of the map...
  const long nd = static_cast<long>(n);
  std::vector<double> marg(2 * n - 1, 0.0);
  for (long j = 0; j < nd; ++j)
    for (long k = 0; k < nd; ++k) marg[static_cast<std::size_t>(j - k + nd - 1)] += map.at(j, k);
  // ...smeared by the in-cell jitter: delta picks up u1 - u2, a triangular
  // kernel that leaves 3/4 in the home cell and 1/8 in each neighbor.
  std::vector<double> expected(marg.size(), 0.0);
  for (std::size_t t = 0; t < marg.size(); ++t) {
    expected[t] = 0.75 * marg[t];
    if (t > 0) expected[t] += 0.125 * marg[t - 1];
    if (t + 1 < marg.size()) expected[t] += 0.125 * marg[t + 1];
  }

  std::vector<std::uint64_t> hist(2 * n - 1, 0);
  for (std::size_t i = 0; i < batch.n_pairs; ++i) {
    const double d = batch.rho1[i] - batch.rho2[i];
    const long t = std::lround(d / map.dx()) + nd - 1;
    if (t >= 0 && t < static_cast<long>(hist.size())) ++hist[static_cast<std::size_t>(t)];
  }

  // pack into the compare harness: positions are the delta lattice
  mc::CountsProfile cp;
  scan::ScanProfile ap;
  for (std::size_t t = 0; t < hist.size(); ++t) {
    const double pos = (static_cast<double>(t) - static_cast<double>(nd - 1)) * map.dx();
    cp.positions.push_back(pos);
    cp.counts.push_back(hist[t]);
    ap.positions.push_back(pos);
    ap.values.push_back(expected[t]);
  }
  cp.n_pairs_total = npairs;
  const auto res = mc::compare_profiles(cp, ap);
  CHECK(res.p_value > 0.01);
}

TEST_CASE("coincidence_counts honors routing and slit windows") {
  mc::PairEventBatch batch;
  batch.rho1 = {0.1e-3, 0.1e-3, 0.1e-3, 0.1e-3};
  batch.rho2 = {0.6e-3, 0.6e-3, 0.6e-3, 0.9e-3};
  batch.route = {mc::Route::Split12, mc::Route::BothToD1, mc::Route::Split21,
                 mc::Route::Split12};
  batch.n_pairs = 4;

  const mc::BinSpec bins{0.0, 1e-3, 0.5e-3};  // centers 0, 0.5 mm, 1.0 mm
  const auto counts =
      mc::coincidence_counts(batch, Protocol::FixedD1, 0.5e-3, bins, /*d1=*/0.0);
  REQUIRE(counts.counts.size() == 3);
  // event 0: signal at D1 (0.1 mm within the slit), idler at 0.6 mm -> bin 1
  // event 1: no coincidence; event 2: Split21 puts the 0.6 mm idler on D1 -> miss
  // event 3: idler at 0.9 mm -> bin 2 (and not bin 1)
  CHECK(counts.counts[0] == 0);
  CHECK(counts.counts[1] == 1);
  CHECK(counts.counts[2] == 1);

  mc::PairEventBatch quiet = batch;
  quiet.route.assign(4, mc::Route::BothToD1);
  const auto zero = mc::coincidence_counts(quiet, Protocol::FixedD1, 0.5e-3, bins, 0.0);
  for (auto c : zero.counts) CHECK(c == 0);
}

TEST_CASE("overlapping bins count an event once per covering placement") {
  mc::PairEventBatch batch;
  batch.rho1 = {0.0};
  batch.rho2 = {0.5e-3};
  batch.route = {mc::Route::Split12};
  batch.n_pairs = 1;

  // step = slit/5: the idler window covers several neighboring placements
  const mc::BinSpec bins{0.0, 1e-3, 0.1e-3};
  const auto counts = mc::coincidence_counts(batch, Protocol::FixedD1, 0.5e-3, bins, 0.0);
  std::uint64_t total = 0;
  for (auto c : counts.counts) total += c;
  CHECK(total == 5);  // |0.5mm - c| <= 0.25mm -> c in {0.3, ..., 0.7} mm
}

TEST_CASE("same-sense and opposite-sense windows move together") {
  mc::PairEventBatch batch;
  batch.rho1 = {1.0e-3, 1.0e-3};
  batch.rho2 = {1.0e-3, -1.0e-3};
  batch.route = {mc::Route::Split12, mc::Route::Split12};
  batch.n_pairs = 2;

  const mc::BinSpec bins{-1.5e-3, 1.5e-3, 0.5e-3};
  const auto same =
      mc::coincidence_counts(batch, Protocol::SameSense, 0.5e-3, bins, 0.0);
  // event 0 sits at (1, 1) mm: both windows cover it only at c = 1.0 mm
  std::uint64_t total_same = 0;
  for (auto c : same.counts) total_same += c;
  CHECK(total_same == 1);
  CHECK(same.counts[5] == 1);

  const auto opp =
      mc::coincidence_counts(batch, Protocol::OppositeSense, 0.5e-3, bins, 0.0);
  // event 1 sits at (1, -1) mm: D1 window at -c covers 1 mm when c = -1 mm
  std::uint64_t total_opp = 0;
  for (auto c : opp.counts) total_opp += c;
  CHECK(total_opp == 1);
  CHECK(opp.counts[1] == 1);
}

TEST_CASE("count bin validation") {
  const auto batch = mc::sample_pairs(synthetic_map(), 10, 1);
  CHECK_THROWS_AS(mc::coincidence_counts(batch, Protocol::FixedD1, 1e-4,
                                         mc::BinSpec{0.0, -1e-3, 1e-4}, 0.0),
                  config_error);
  CHECK_THROWS_AS(mc::coincidence_counts(batch, Protocol::FixedD1, 1e-4,
                                         mc::BinSpec{0.0, 1e-3, 0.0}, 0.0),
                  config_error);
  CHECK_THROWS_AS(mc::coincidence_counts(batch, Protocol::SinglesCalibration, 1e-4,
                                         mc::BinSpec{0.0, 1e-3, 1e-4}, 0.0),
                  config_error);
  CHECK_THROWS_AS(mc::coincidence_counts(batch, Protocol::FixedD1, 0.0,
                                         mc::BinSpec{0.0, 1e-3, 1e-4}, 0.0),
                  config_error);
}

TEST_CASE("compare_profiles calibration: p is uniform over seeds") {
  const auto& map = synthetic_map();
  const double slit = 3 * map.dx();
  const auto slit_map = corr::apply_detector_slits(map, slit);
  const auto bins = default_bins(map, slit);
  const double d1 = snap0(map);
  const auto analytic = analytic_at_bins(slit_map, d1, bins);

  std::vector<double> ps;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto batch = mc::sample_pairs(map, 50000, seed);
    const auto counts = mc::coincidence_counts(batch, Protocol::FixedD1, slit, bins, d1);
    ps.push_back(mc::compare_profiles(counts, analytic).p_value);
  }
  std::nth_element(ps.begin(), ps.begin() + ps.size() / 2, ps.end());
  const double median = ps[ps.size() / 2];
  CHECK(median > 0.2);
  CHECK(median < 0.8);
}

TEST_CASE("compare_profiles flags a gross mismatch") {
  const auto& map = synthetic_map();
  const double slit = 3 * map.dx();
  const auto slit_map = corr::apply_detector_slits(map, slit);
  const auto bins = default_bins(map, slit);
  const double d1 = snap0(map);

  const auto batch = mc::sample_pairs(map, 200000, 5);
  const auto counts = mc::coincidence_counts(batch, Protocol::FixedD1, slit, bins, d1);

  auto shifted = analytic_at_bins(slit_map, d1, bins);
  std::rotate(shifted.values.begin(), shifted.values.begin() + 5, shifted.values.end());
  const auto res = mc::compare_profiles(counts, shifted);
  CHECK(res.p_value < 1e-6);
  CHECK(res.max_sigma > 5.0);
}

TEST_CASE("compare_profiles edge cases") {
  mc::CountsProfile cp;
  scan::ScanProfile ap;
  for (int i = 0; i < 8; ++i) {
    cp.positions.push_back(i * 1e-4);
    cp.counts.push_back(0);
    ap.positions.push_back(i * 1e-4);
    ap.values.push_back(0.0);
  }
  const auto zero = mc::compare_profiles(cp, ap);
  CHECK(zero.chi2 == 0.0);
  CHECK(zero.dof == 0);
  CHECK(zero.p_value == 1.0);

  ap.positions[3] += 1e-6;
  CHECK_THROWS_AS(mc::compare_profiles(cp, ap), config_error);
  ap.positions.pop_back();
  CHECK_THROWS_AS(mc::compare_profiles(cp, ap), config_error);
}

TEST_CASE("compare_profiles merges thin bins") {
  mc::CountsProfile cp;
  scan::ScanProfile ap;
  // two fat bins flanked by near-empty tails
  const std::vector<double> expect = {0.2, 0.3, 400.0, 400.0, 0.3, 0.2};
  const std::vector<std::uint64_t> obs = {0, 1, 395, 410, 0, 0};
  for (std::size_t i = 0; i < expect.size(); ++i) {
    cp.positions.push_back(static_cast<double>(i));
    cp.counts.push_back(obs[i]);
    ap.positions.push_back(static_cast<double>(i));
    ap.values.push_back(expect[i]);
  }
  const auto res = mc::compare_profiles(cp, ap);
  CHECK(res.dof == 1);  // tails fold into the fat bins: 2 groups
  CHECK(res.p_value > 0.01);
}

TEST_CASE("normalized MC error shrinks as 1/sqrt(n)") {
  const auto& map = synthetic_map();
  const double slit = 3 * map.dx();
  const auto slit_map = corr::apply_detector_slits(map, slit);
  const auto bins = default_bins(map, slit);
  const double d1 = snap0(map);
  const auto analytic = analytic_at_bins(slit_map, d1, bins);
  double an_total = 0;
  for (double v : analytic.values) an_total += v;

  std::vector<double> log_n, log_rms;
  for (std::size_t n : {1000u, 10000u, 100000u, 1000000u}) {
    double rms_acc = 0;
    const int seeds = 3;
    for (int s = 0; s < seeds; ++s) {
      const auto batch = mc::sample_pairs(map, n, 900 + static_cast<std::uint64_t>(s));
      const auto counts = mc::coincidence_counts(batch, Protocol::FixedD1, slit, bins, d1);
      double total = 0;
      for (auto c : counts.counts) total += static_cast<double>(c);
      REQUIRE(total > 0);
      double ss = 0;
      for (std::size_t b = 0; b < counts.counts.size(); ++b) {
        const double diff =
            static_cast<double>(counts.counts[b]) / total - analytic.values[b] / an_total;
        ss += diff * diff;
      }
      rms_acc += std::sqrt(ss / static_cast<double>(counts.counts.size()));
    }
    log_n.push_back(std::log(static_cast<double>(n)));
    log_rms.push_back(std::log(rms_acc / seeds));
  }

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    mx += log_n[i];
    my += log_rms[i];
  }
  mx /= static_cast<double>(log_n.size());
  my /= static_cast<double>(log_n.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    sxx += (log_n[i] - mx) * (log_n[i] - mx);
    sxy += (log_n[i] - mx) * (log_rms[i] - my);
  }
  const double slope = sxy / sxx;
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.2));
}

TEST_CASE("binned coincidence map keeps the antibunching structure") {
  const auto& map = synthetic_map();
  const auto batch = mc::sample_pairs(map, 200000, 77);

  const double bw = 3 * map.dx();
  const double lo = scan::snap_to_grid(-2.4e-3, map.x0(), map.dx());
  const std::size_t nb = 33;
  const auto binned = mc::binned_coincidence_map(
      batch, mc::BinSpec{lo, lo + static_cast<double>(nb - 1) * bw, bw}, map.parity(),
      map.mu_s(), map.mu_i());
  CHECK(binned.n() == nb);

  const auto rep = corr::antibunch_test(binned, static_cast<double>(nb) * bw);
  CHECK(rep.violated);
  CHECK(rep.contrast > 3.0);
}
