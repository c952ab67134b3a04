#include "biteweight/fft.hpp"

#include <cmath>
#include <cstdint>

namespace biteweight {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}
}  // namespace

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

std::vector<std::complex<double>> dft_real(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  if (n == 0) return out;
  if (n == 1) {
    out[0] = x[0];
    return out;
  }

  if (is_pow2(n)) {
    for (size_t i = 0; i < n; ++i) out[i] = x[i];
    fft_pow2(out, false);
    return out;
  }

  // Bluestein: X[k] = w(k) * sum_j x[j] w(j) * conj-chirp, computed as a
  // cyclic convolution of length m >= 2n-1. Chirp phase pi*t^2/n is reduced
  // mod 2*pi via t^2 mod 2n to keep accuracy for large t.
  const size_t m = next_pow2(2 * n - 1);
  std::vector<std::complex<double>> chirp(n);
  for (size_t t = 0; t < n; ++t) {
    const uint64_t sq = (static_cast<uint64_t>(t) * t) % (2 * n);
    const double ang = -M_PI * static_cast<double>(sq) / static_cast<double>(n);
    chirp[t] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<std::complex<double>> a(m), b(m);
  for (size_t t = 0; t < n; ++t) a[t] = x[t] * chirp[t];
  b[0] = std::conj(chirp[0]);
  for (size_t t = 1; t < n; ++t) {
    b[t] = std::conj(chirp[t]);
    b[m - t] = b[t];
  }
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_pow2(a, true);
  for (size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  return out;
}

}  // namespace biteweight
