#pragma once

#include <complex>
#include <span>

namespace ofbm::detail {

/// In-place unnormalized DFT; `inverse` selects the +i sign convention.
/// Plans are cached per (size, direction) and shared across threads.
void fft_inplace(std::span<std::complex<double>> data, bool inverse);

}  // namespace ofbm::detail
