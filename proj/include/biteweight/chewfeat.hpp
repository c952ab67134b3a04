#pragma once

#include <array>
#include <vector>

#include "biteweight/types.hpp"

namespace biteweight {

inline constexpr int kDescriptorDim = 13;
inline constexpr int kNumBands = 9;

// Octave band edges 20*2^k Hz, k = 0..9 (20 Hz .. 10240 Hz).
std::array<double, kNumBands + 1> band_edges_hz();

// Fixed-length per-chew audio descriptor. All energy terms are per-sample so
// chews of different durations are directly comparable:
//   [0..8]  ln of per-sample energy in the 9 octave bands
//   [9]     sample skewness of the time-domain signal
//   [10]    sample kurtosis (non-excess)
//   [11]    Katz fractal dimension
//   [12]    ln of per-sample broadband energy
struct ChewDescriptor {
  std::array<double, kDescriptorDim> v{};

  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

// Throws std::runtime_error("chew too short") for fewer than 16 samples.
ChewDescriptor extract_chew_descriptor(const std::vector<double>& samples, double fs_hz);

// Convenience: slice a chew out of a recording and extract.
ChewDescriptor extract_chew_descriptor(const Recording& rec, const ChewAnnotation& chew);

// Katz fractal dimension: FD = log10(n) / (log10(n) + log10(d/L)) with
// L = total path length and d = max distance from the first sample.
// Degenerate signals (L = 0 or d = 0) give 1.
double katz_fractal_dimension(const std::vector<double>& x);

// Per-feature z-scoring statistics fit on training descriptors only.
struct Standardizer {
  std::vector<double> mean, std;

  int dim() const { return static_cast<int>(mean.size()); }
};

// Sample (n-1) standard deviation per dimension; dimensions with
// std < 1e-12 pass through with std = 1. Throws on fewer than 2 rows.
Standardizer fit_standardizer(const std::vector<ChewDescriptor>& train);
Standardizer fit_standardizer_rows(const std::vector<std::vector<double>>& rows);

ChewDescriptor apply_standardizer(const Standardizer& s, const ChewDescriptor& x);
std::vector<double> apply_standardizer(const Standardizer& s, const std::vector<double>& x);

}  // namespace biteweight
