#include "spdc/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <new>

namespace spdc::fft {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

void transform(std::vector<std::complex<double>>& data, int sign) {
  const int n = static_cast<int>(data.size());
  if (n == 0) return;

  // fftw_malloc keeps alignment (and therefore the chosen kernel) stable
  // across calls, so repeated transforms of equal inputs are bit-identical.
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * data.size()));
  if (buf == nullptr) throw std::bad_alloc();

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
  }

  // std::complex<double> is layout-compatible with fftw_complex (double[2]).
  std::memcpy(static_cast<void*>(buf), static_cast<const void*>(data.data()),
              sizeof(fftw_complex) * data.size());
  fftw_execute(plan);
  std::memcpy(static_cast<void*>(data.data()), static_cast<const void*>(buf),
              sizeof(fftw_complex) * data.size());

  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

}  // namespace

void forward(std::vector<std::complex<double>>& data) { transform(data, FFTW_FORWARD); }

void inverse(std::vector<std::complex<double>>& data) {
  transform(data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

}  // namespace spdc::fft
