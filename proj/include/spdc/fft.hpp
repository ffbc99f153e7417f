#pragma once

#include <complex>
#include <vector>

namespace spdc::fft {

/// In-place forward DFT (negative exponent), unnormalized.
void forward(std::vector<std::complex<double>>& data);

/// In-place inverse DFT, normalized by 1/n.
void inverse(std::vector<std::complex<double>>& data);

}  // namespace spdc::fft
