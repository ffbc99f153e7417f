#include "spdc/montecarlo.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "spdc/errors.hpp"

namespace spdc::mc {

namespace {

// 53-bit uniform in [0, 1).
inline double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t bin_count(const BinSpec& bins) {
  if (!(bins.step > 0) || bins.hi < bins.lo)
    throw config_error("degenerate bin range: need step > 0 and hi >= lo");
  return static_cast<std::size_t>(std::floor((bins.hi - bins.lo) / bins.step + 1e-9)) + 1;
}

}  // namespace

PairEventBatch sample_pairs(const corr::CoincidenceMap& map, std::size_t n_pairs,
                            std::uint64_t seed) {
  if (n_pairs < 1) throw config_error("sample_pairs needs n_pairs >= 1");
  const std::size_t n = map.n();

  // Flattened running sum, plus per-row cumulative totals for a two-level
  // search (row first, then within the row's contiguous slice).
  std::vector<double> flat(n * n);
  std::vector<double> row_cum(n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double* src = map.values().data() + j * n;
    double* dst = flat.data() + j * n;
    for (std::size_t k = 0; k < n; ++k) {
      acc += src[k];
      dst[k] = acc;
    }
    row_cum[j] = acc;
  }
  const double total = acc;
  if (!(total > 0.0)) throw config_error("sample_pairs needs a map with positive total mass");

  PairEventBatch batch;
  batch.seed = seed;
  batch.n_pairs = n_pairs;
  batch.rho1.resize(n_pairs);
  batch.rho2.resize(n_pairs);
  batch.route.resize(n_pairs);

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const double r = u01(rng) * total;
    const std::size_t j = static_cast<std::size_t>(
        std::upper_bound(row_cum.begin(), row_cum.end(), r) - row_cum.begin());
    const double* slice = flat.data() + j * n;
    const std::size_t k =
        static_cast<std::size_t>(std::upper_bound(slice, slice + n, r) - slice);
    batch.rho1[i] = map.x(j) + (u01(rng) - 0.5) * map.dx();
    batch.rho2[i] = map.x(k) + (u01(rng) - 0.5) * map.dx();
    batch.route[i] = static_cast<Route>(rng() & 3);
  }
  return batch;
}

void CountsProfile::write_csv(std::ostream& os, const std::vector<double>* expected) const {
  char buf[64];
  os << "# protocol=" << scan::to_string(protocol) << '\n';
  os << "# seed=" << seed << '\n';
  os << "# n_pairs=" << n_pairs_total << '\n';
  std::snprintf(buf, sizeof(buf), "%.17g", slit_width);
  os << "# slit_width_m=" << buf << '\n';
  os << "position_m,counts,expected\n";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", positions[i]);
    os << buf << ',' << counts[i] << ',';
    if (expected != nullptr) {
      std::snprintf(buf, sizeof(buf), "%.17g", (*expected)[i]);
      os << buf;
    }
    os << '\n';
  }
}

CountsProfile coincidence_counts(const PairEventBatch& batch, scan::Protocol protocol,
                                 double slit_width, BinSpec bins, double d1_position) {
  if (!(slit_width > 0)) throw config_error("slit_width must be > 0");
  if (protocol == scan::Protocol::SinglesCalibration)
    throw config_error("coincidence_counts needs a coincidence protocol, not SinglesCalibration");

  const std::size_t nb = bin_count(bins);
  CountsProfile out;
  out.protocol = protocol;
  out.seed = batch.seed;
  out.slit_width = slit_width;
  out.n_pairs_total = batch.n_pairs;
  out.positions.resize(nb);
  out.counts.assign(nb, 0);
  for (std::size_t b = 0; b < nb; ++b)
    out.positions[b] = bins.lo + static_cast<double>(b) * bins.step;

  const double half = slit_width / 2.0;
  const long nbl = static_cast<long>(nb);

  // Bin indices whose window |p - center(b)| <= half admit p.
  auto window_range = [&](double p, long& blo, long& bhi) {
    blo = static_cast<long>(std::ceil((p - half - bins.lo) / bins.step - 1e-12));
    bhi = static_cast<long>(std::floor((p + half - bins.lo) / bins.step + 1e-12));
    blo = std::max<long>(blo, 0);
    bhi = std::min<long>(bhi, nbl - 1);
  };

  for (std::size_t i = 0; i < batch.n_pairs; ++i) {
    const Route r = batch.route[i];
    if (r != Route::Split12 && r != Route::Split21) continue;
    const double d1p = (r == Route::Split12) ? batch.rho1[i] : batch.rho2[i];
    const double d2p = (r == Route::Split12) ? batch.rho2[i] : batch.rho1[i];

    long blo, bhi;
    window_range(d2p, blo, bhi);
    if (blo > bhi) continue;

    switch (protocol) {
      case scan::Protocol::FixedD1: {
        if (std::abs(d1p - d1_position) > half) continue;
        for (long b = blo; b <= bhi; ++b) ++out.counts[static_cast<std::size_t>(b)];
        break;
      }
      case scan::Protocol::SameSense: {
        long alo, ahi;
        window_range(d1p, alo, ahi);  // D1 window tracks the same bin center
        for (long b = std::max(blo, alo); b <= std::min(bhi, ahi); ++b)
          ++out.counts[static_cast<std::size_t>(b)];
        break;
      }
      case scan::Protocol::OppositeSense: {
        // D1 sits at 2*center - c_b, so c_b must lie within half of
        // 2*center - d1p.
        long alo, ahi;
        window_range(2.0 * d1_position - d1p, alo, ahi);
        for (long b = std::max(blo, alo); b <= std::min(bhi, ahi); ++b)
          ++out.counts[static_cast<std::size_t>(b)];
        break;
      }
      case scan::Protocol::SinglesCalibration:
        break;
    }
  }
  return out;
}

corr::CoincidenceMap binned_coincidence_map(const PairEventBatch& batch, BinSpec bins,
                                            int parity, double mu_s, double mu_i) {
  const std::size_t nb = bin_count(bins);
  if (nb < 2) throw config_error("binned map needs at least 2 bins");
  corr::CoincidenceMap map(nb, bins.step, bins.lo, parity, mu_s, mu_i);

  const long nbl = static_cast<long>(nb);
  for (std::size_t i = 0; i < batch.n_pairs; ++i) {
    const Route r = batch.route[i];
    if (r != Route::Split12 && r != Route::Split21) continue;
    const double d1p = (r == Route::Split12) ? batch.rho1[i] : batch.rho2[i];
    const double d2p = (r == Route::Split12) ? batch.rho2[i] : batch.rho1[i];
    const long j = std::lround((d1p - bins.lo) / bins.step);
    const long k = std::lround((d2p - bins.lo) / bins.step);
    if (j < 0 || j >= nbl || k < 0 || k >= nbl) continue;
    map.at(static_cast<std::size_t>(j), static_cast<std::size_t>(k)) += 1.0;
  }
  return map;
}

CompareResult compare_profiles(const CountsProfile& mc, const scan::ScanProfile& analytic) {
  if (mc.positions.size() != analytic.positions.size())
    throw config_error("compare_profiles: position lattices differ in length");
  for (std::size_t i = 0; i < mc.positions.size(); ++i) {
    if (std::abs(mc.positions[i] - analytic.positions[i]) > 1e-9)
      throw config_error("compare_profiles: position lattices do not match");
  }

  double total_mc = 0.0, total_an = 0.0;
  for (auto c : mc.counts) total_mc += static_cast<double>(c);
  for (auto v : analytic.values) total_an += v;

  CompareResult res;
  if (total_an <= 0.0) {
    if (total_mc == 0.0) return res;  // zero against zero: chi2 = 0, p = 1
    throw config_error("compare_profiles: analytic mass is zero but MC counts are not");
  }
  const double scale = total_mc / total_an;

  // Greedy left-to-right merge until each group has expected >= 5;
  // a small trailing remainder folds into the previous group.
  std::vector<double> obs_g, exp_g;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < mc.counts.size(); ++i) {
    o += static_cast<double>(mc.counts[i]);
    e += analytic.values[i] * scale;
    if (e >= 5.0) {
      obs_g.push_back(o);
      exp_g.push_back(e);
      o = 0.0;
      e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (!exp_g.empty()) {
      obs_g.back() += o;
      exp_g.back() += e;
    } else {
      obs_g.push_back(o);
      exp_g.push_back(e);
    }
  }

  for (std::size_t g = 0; g < obs_g.size(); ++g) {
    const double var = std::max(exp_g[g], 1.0);
    const double sigma = std::abs(obs_g[g] - exp_g[g]) / std::sqrt(var);
    res.chi2 += sigma * sigma;
    res.max_sigma = std::max(res.max_sigma, sigma);
  }
  // One degree absorbed by the fitted scale.
  res.dof = obs_g.size() > 1 ? obs_g.size() - 1 : 0;
  res.p_value = res.dof > 0
                    ? boost::math::gamma_q(static_cast<double>(res.dof) / 2.0, res.chi2 / 2.0)
                    : 1.0;
  return res;
}

}  // namespace spdc::mc
