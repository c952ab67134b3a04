#include <cmath>

#include "biteweight/chewfeat.hpp"
#include "biteweight/fft.hpp"
#include "biteweight/rng.hpp"
#include "doctest.h"

using namespace biteweight;

namespace {

std::vector<double> random_burst(Rng& rng, size_t n) {
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) {
    const double env = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                             static_cast<double>(n - 1)));
    x[i] = env * rng.normal() * 0.1;
  }
  return x;
}

// periodogram band-energy oracle: direct quadratic DFT, same band rule
double oracle_band_share(const std::vector<double>& x, double fs, double lo, double hi) {
  const size_t n = x.size();
  double in_band = 0.0, total = 0.0;
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * M_PI * static_cast<double>(k) *
                         static_cast<double>(t) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    const double cyc = static_cast<double>(k <= n / 2 ? k : n - k);
    const double f = cyc * fs / static_cast<double>(n);
    const double p = std::norm(acc);
    if (f >= 20.0 && f < 10240.0) {
      total += p;
      if (f >= lo && f < hi) in_band += p;
    }
  }
  return in_band / total;
}

}  // namespace

TEST_CASE("DC signal hits the zero-variance conventions") {
  std::vector<double> x(512, 0.5);
  const ChewDescriptor d = extract_chew_descriptor(x, 44100.0);
  CHECK(d[9] == 0.0);   // skewness
  CHECK(d[10] == 0.0);  // kurtosis
  CHECK(d[11] == 1.0);  // katz (extent from first sample is 0)
  CHECK(d[12] == doctest::Approx(std::log(0.25 + 1e-12)).epsilon(1e-12));
}

TEST_CASE("strictly linear ramp has Katz dimension 1") {
  std::vector<double> x(1000);
  for (size_t i = 0; i < x.size(); ++i) x[i] = 0.001 * static_cast<double>(i);
  CHECK(katz_fractal_dimension(x) == doctest::Approx(1.0).epsilon(1e-12));
  const ChewDescriptor d = extract_chew_descriptor(x, 44100.0);
  CHECK(d[11] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("1 kHz sine concentrates in the 640-1280 Hz band") {
  const double fs = 44100.0;
  std::vector<double> x(4410);
  for (size_t i = 0; i < x.size(); ++i)
    x[i] = std::sin(2.0 * M_PI * 1000.0 * static_cast<double>(i) / fs);
  const ChewDescriptor d = extract_chew_descriptor(x, fs);

  double total = 0.0;
  for (int b = 0; b < kNumBands; ++b) total += std::exp(d[b]) - 1e-12;
  const double share = (std::exp(d[5]) - 1e-12) / total;  // band 5 = [640, 1280)
  CHECK(share >= 0.95);
  CHECK(std::fabs(d[9]) < 1e-2);  // near-zero skewness over whole periods

  // the independent quadratic-DFT oracle agrees on the captured share
  const double oracle = oracle_band_share(x, fs, 640.0, 1280.0);
  CHECK(share == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("chews shorter than 16 samples are rejected") {
  std::vector<double> x(15, 0.1);
  CHECK_THROWS_WITH_AS(extract_chew_descriptor(x, 44100.0), "chew too short",
                       std::runtime_error);
}

TEST_CASE("standardizer symmetry and degenerate guard") {
  ChewDescriptor v, nv;
  for (int j = 0; j < kDescriptorDim; ++j) {
    v[j] = 0.5 * j + 1.0;
    nv[j] = -v[j];
  }
  const Standardizer s = fit_standardizer({v, nv});
  for (int j = 0; j < kDescriptorDim; ++j) {
    CHECK(s.mean[static_cast<size_t>(j)] == doctest::Approx(0.0));
    const ChewDescriptor z = apply_standardizer(s, v);
    CHECK(z[j] == doctest::Approx(v[j] / s.std[static_cast<size_t>(j)]));
  }

  // constant dimension standardizes to zero
  ChewDescriptor a = v, b = v;
  b[3] = v[3];  // dimension 3 constant across both
  b[0] = 7.0;
  const Standardizer s2 = fit_standardizer({a, b});
  CHECK(apply_standardizer(s2, a)[3] == doctest::Approx(0.0));
  CHECK(s2.std[3] == 1.0);
}

TEST_CASE("standardized 100x13 matrix has zero mean and unit sample std") {
  Rng rng(17);
  std::vector<ChewDescriptor> rows(100);
  for (auto& r : rows)
    for (int j = 0; j < kDescriptorDim; ++j) r[j] = rng.uniform(-3.0, 5.0);
  const Standardizer s = fit_standardizer(rows);
  std::vector<ChewDescriptor> z;
  z.reserve(rows.size());
  for (const auto& r : rows) z.push_back(apply_standardizer(s, r));

  // independent statistics oracle over the standardized matrix
  for (int j = 0; j < kDescriptorDim; ++j) {
    double m = 0.0;
    for (const auto& r : z) m += r[j];
    m /= static_cast<double>(z.size());
    double var = 0.0;
    for (const auto& r : z) var += (r[j] - m) * (r[j] - m);
    var /= static_cast<double>(z.size()) - 1.0;
    CHECK(std::fabs(m) < 1e-10);
    CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-10);
  }
}

TEST_CASE("apply_standardizer is the identity for mean 0 / std 1") {
  Standardizer s;
  s.mean.assign(kDescriptorDim, 0.0);
  s.std.assign(kDescriptorDim, 1.0);
  ChewDescriptor d;
  for (int j = 0; j < kDescriptorDim; ++j) d[j] = 0.3 * j - 1.0;
  const ChewDescriptor z = apply_standardizer(s, d);
  for (int j = 0; j < kDescriptorDim; ++j) CHECK(z[j] == d[j]);
}

TEST_CASE("standardizer rejects dimension mismatches and tiny inputs") {
  CHECK_THROWS_AS(fit_standardizer_rows({{1.0, 2.0}}), std::runtime_error);
  Standardizer s;
  s.mean.assign(3, 0.0);
  s.std.assign(3, 1.0);
  CHECK_THROWS_AS(apply_standardizer(s, std::vector<double>{1.0, 2.0}),
                  std::runtime_error);
}

TEST_CASE("self-concatenation leaves per-sample energies invariant") {
  Rng rng(23);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = static_cast<size_t>(rng.uniform_int(100, 1500));
    const std::vector<double> x = random_burst(rng, n);
    std::vector<double> xx = x;
    xx.insert(xx.end(), x.begin(), x.end());
    const ChewDescriptor a = extract_chew_descriptor(x, 44100.0);
    const ChewDescriptor b = extract_chew_descriptor(xx, 44100.0);
    for (int j = 0; j < kNumBands; ++j)
      worst = std::max(worst, std::fabs(a[j] - b[j]));
    worst = std::max(worst, std::fabs(a[12] - b[12]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("amplitude scaling shifts log energies by exactly 2 ln c") {
  // every octave band needs real energy, otherwise the 1e-12 guard inside
  // the log caps the attainable precision; one sine per band does it
  Rng rng(29);
  const auto edges = band_edges_hz();
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = static_cast<size_t>(rng.uniform_int(4410, 13230));
    std::vector<double> x(n, 0.0);
    for (int b = 0; b < kNumBands; ++b) {
      const double f = std::sqrt(edges[static_cast<size_t>(b)] *
                                 edges[static_cast<size_t>(b) + 1]);
      const double phase = rng.uniform(0.0, 2.0 * M_PI);
      const double amp = rng.uniform(0.15, 0.3);
      for (size_t i = 0; i < n; ++i)
        x[i] += amp * std::sin(2.0 * M_PI * f * static_cast<double>(i) / 44100.0 + phase);
    }
    for (size_t i = 0; i < n; ++i) x[i] += 0.002 * rng.normal();

    const double c = rng.uniform(0.5, 2.0);
    std::vector<double> cx(n);
    for (size_t i = 0; i < n; ++i) cx[i] = c * x[i];
    const ChewDescriptor a = extract_chew_descriptor(x, 44100.0);
    const ChewDescriptor b = extract_chew_descriptor(cx, 44100.0);
    const double shift = 2.0 * std::log(c);
    for (int j = 0; j < kNumBands; ++j)
      CHECK(std::fabs((b[j] - a[j]) - shift) < 1e-9);
    CHECK(std::fabs((b[12] - a[12]) - shift) < 1e-9);
    CHECK(std::fabs(b[9] - a[9]) < 1e-9);
    CHECK(std::fabs(b[10] - a[10]) < 1e-9);
    CHECK(std::fabs(b[11] - a[11]) < 1e-9);
  }
}
