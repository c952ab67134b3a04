#pragma once

#include <complex>
#include <vector>

namespace biteweight {

// In-place radix-2 Cooley-Tukey. n must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

// DFT of a real signal at its natural length (any n >= 1), via radix-2 when
// n is a power of two and Bluestein's chirp-z otherwise.
std::vector<std::complex<double>> dft_real(const std::vector<double>& x);

}  // namespace biteweight
