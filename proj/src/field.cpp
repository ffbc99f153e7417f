#include "spdc/field.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "spdc/errors.hpp"
#include "spdc/fft.hpp"

namespace spdc::field {

namespace {

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

std::string msg(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return buf;
}

}  // namespace

FieldGrid::FieldGrid(GridSpec spec, std::vector<std::complex<double>> samples, double wavelength)
    : spec_(spec), samples_(std::move(samples)), wavelength_(wavelength) {
  if (!power_of_two(spec_.n))
    throw config_error("grid size n must be a power of two >= 2, got " + std::to_string(spec_.n));
  if (!(spec_.dx > 0)) throw config_error("grid spacing dx must be > 0");
  if (!(wavelength_ > 0)) throw config_error("wavelength must be > 0");
  if (samples_.size() != spec_.n)
    throw config_error("sample count " + std::to_string(samples_.size()) +
                       " does not match grid size " + std::to_string(spec_.n));
}

bool FieldGrid::is_symmetric() const {
  const double want = -0.5 * static_cast<double>(spec_.n - 1) * spec_.dx;
  return std::abs(spec_.x0 - want) <= 1e-9 * spec_.dx;
}

FieldGrid make_gaussian(const GridSpec& spec, double waist, double wavelength) {
  if (!(waist > 0)) throw config_error("gaussian waist must be > 0");
  if (waist < 4.0 * spec.dx)
    throw config_error(msg("gaussian waist %g m unresolvable: below 4*dx = %g m", waist, 4.0 * spec.dx));
  const double quarter_window = static_cast<double>(spec.n) * spec.dx / 4.0;
  if (waist > quarter_window)
    throw config_error(msg("gaussian waist %g m overflows window: above n*dx/4 = %g m", waist, quarter_window));

  std::vector<std::complex<double>> s(spec.n);
  for (std::size_t k = 0; k < spec.n; ++k) {
    const double x = spec.x0 + static_cast<double>(k) * spec.dx;
    s[k] = std::exp(-(x * x) / (waist * waist));
  }
  return FieldGrid(spec, std::move(s), wavelength);
}

FieldGrid apply_wire(const FieldGrid& field, double center, double width) {
  if (!(width > 2.0 * field.dx()))
    throw config_error(msg("wire width %g m unresolvable: must exceed 2*dx = %g m", width, 2.0 * field.dx()));

  FieldGrid out = field;
  const double half = width / 2.0;
  for (std::size_t k = 0; k < out.n(); ++k) {
    if (std::abs(out.x(k) - center) <= half) out.samples()[k] = 0.0;
  }
  return out;
}

FieldGrid apply_thin_lens(const FieldGrid& field, double focal_length) {
  if (focal_length == 0.0) throw config_error("thin lens focal length must be nonzero");

  FieldGrid out = field;
  const double coeff = -std::numbers::pi / (field.wavelength() * focal_length);
  for (std::size_t k = 0; k < out.n(); ++k) {
    const double x = out.x(k);
    out.samples()[k] *= std::polar(1.0, coeff * x * x);
  }
  return out;
}

double max_safe_distance(const GridSpec& spec, double wavelength) {
  return static_cast<double>(spec.n) * spec.dx * spec.dx / wavelength;
}

FieldGrid propagate(const FieldGrid& field, double distance) {
  const double n_dx = field.window();
  const double f_max = 1.0 / (2.0 * field.dx());
  const double ratio = field.wavelength() * std::abs(distance) * f_max / n_dx;
  if (ratio > 0.5 * (1.0 + 1e-12)) {
    throw config_error(msg("propagation distance %g m undersamples the transfer function; "
                           "maximum safe |distance| for this grid is %g m",
                           distance, max_safe_distance(field.grid(), field.wavelength())));
  }

  auto spectrum = field.samples();
  fft::forward(spectrum);

  const std::size_t n = field.n();
  const double coeff = -std::numbers::pi * field.wavelength() * distance;
  for (std::size_t k = 0; k < n; ++k) {
    const double idx = (k <= n / 2) ? static_cast<double>(k)
                                    : static_cast<double>(k) - static_cast<double>(n);
    const double f = idx / n_dx;
    spectrum[k] *= std::polar(1.0, coeff * f * f);
  }

  fft::inverse(spectrum);
  return FieldGrid(field.grid(), std::move(spectrum), field.wavelength());
}

FieldGrid invert_coordinate(const FieldGrid& field) {
  if (!field.is_symmetric())
    throw config_error("coordinate inversion needs a grid symmetric about 0 (x0 = -(n-1)*dx/2); "
                       "-x is not representable here");

  std::vector<std::complex<double>> s(field.n());
  for (std::size_t k = 0; k < field.n(); ++k) s[k] = field.samples()[field.n() - 1 - k];
  return FieldGrid(field.grid(), std::move(s), field.wavelength());
}

IntensityProfile intensity(const FieldGrid& field) {
  IntensityProfile out;
  out.grid = field.grid();
  out.values.resize(field.n());
  for (std::size_t k = 0; k < field.n(); ++k) out.values[k] = std::norm(field.samples()[k]);
  return out;
}

double total_power(const FieldGrid& field) {
  double acc = 0.0;
  for (const auto& s : field.samples()) acc += std::norm(s);
  return acc * field.dx();
}

std::complex<double> sample_at(const FieldGrid& field, double x) {
  const double t = (x - field.x0()) / field.dx();
  const double last = static_cast<double>(field.n() - 1);
  if (t < 0.0 || t > last) return 0.0;
  const auto i = static_cast<std::size_t>(t);
  if (i >= field.n() - 1) return field.samples()[field.n() - 1];
  const double frac = t - static_cast<double>(i);
  const auto& s = field.samples();
  return s[i] + frac * (s[i + 1] - s[i]);
}

}  // namespace spdc::field
