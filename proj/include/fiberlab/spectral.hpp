#pragma once

#include <complex>
#include <span>
#include <vector>

namespace fiberlab::spectral {

/// Real-to-complex DFT of n samples: returns n/2 + 1 coefficients, unnormalized.
std::vector<std::complex<double>> forward(std::span<const double> values);

/// Inverse of forward, including the 1/n normalization.
std::vector<double> inverse(std::span<const std::complex<double>> coeffs, std::size_t n);

}  // namespace fiberlab::spectral
