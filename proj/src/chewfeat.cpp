#include "biteweight/chewfeat.hpp"

#include <cmath>
#include <stdexcept>

#include "biteweight/fft.hpp"

namespace biteweight {

namespace {
constexpr double kEnergyGuard = 1e-12;
}

std::array<double, kNumBands + 1> band_edges_hz() {
  std::array<double, kNumBands + 1> e{};
  for (int k = 0; k <= kNumBands; ++k) e[static_cast<size_t>(k)] = 20.0 * std::pow(2.0, k);
  return e;
}

double katz_fractal_dimension(const std::vector<double>& x) {
  const size_t n = x.size();
  if (n < 2) return 1.0;
  double path = 0.0, extent = 0.0;
  for (size_t i = 1; i < n; ++i) {
    path += std::fabs(x[i] - x[i - 1]);
    extent = std::max(extent, std::fabs(x[i] - x[0]));
  }
  if (path <= 0.0 || extent <= 0.0) return 1.0;
  const double logn = std::log10(static_cast<double>(n));
  const double denom = logn + std::log10(extent / path);
  if (denom <= 0.0) return 1.0;
  return logn / denom;
}

ChewDescriptor extract_chew_descriptor(const std::vector<double>& samples, double fs_hz) {
  const size_t n = samples.size();
  if (n < 16) throw std::runtime_error("chew too short");

  ChewDescriptor d;

  // Band energies from the natural-length DFT, no window: bins of a
  // self-concatenated signal land on the original bin frequencies, which
  // keeps per-sample band energy invariant to duration.
  const auto X = dft_real(samples);
  const auto edges = band_edges_hz();
  std::array<double, kNumBands> band{};
  const double nd = static_cast<double>(n);
  for (size_t k = 0; k < n; ++k) {
    const double cyc = static_cast<double>(k <= n / 2 ? k : n - k);
    const double freq = cyc * fs_hz / nd;
    if (freq < edges[0] || freq >= edges[kNumBands]) continue;
    int b = 0;
    while (b + 1 < kNumBands && freq >= edges[static_cast<size_t>(b) + 1]) ++b;
    band[static_cast<size_t>(b)] += std::norm(X[k]);
  }
  for (int b = 0; b < kNumBands; ++b)
    d[b] = std::log(band[static_cast<size_t>(b)] / (nd * nd) + kEnergyGuard);

  // time-domain moments
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= nd;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, energy = 0.0;
  for (double v : samples) {
    const double c = v - mean;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
    energy += v * v;
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  if (m2 < 1e-24) {
    d[9] = 0.0;   // zero-variance convention
    d[10] = 0.0;
  } else {
    d[9] = m3 / std::pow(m2, 1.5);
    d[10] = m4 / (m2 * m2);
  }

  d[11] = katz_fractal_dimension(samples);
  d[12] = std::log(energy / nd + kEnergyGuard);
  return d;
}

ChewDescriptor extract_chew_descriptor(const Recording& rec, const ChewAnnotation& chew) {
  const double fs = static_cast<double>(rec.sample_rate_hz);
  size_t i0 = static_cast<size_t>(std::llround(chew.start_s * fs));
  size_t i1 = static_cast<size_t>(std::llround(chew.stop_s * fs));
  if (i1 > rec.samples.size()) i1 = rec.samples.size();
  if (i0 >= i1) throw std::runtime_error("chew too short");
  std::vector<double> x(rec.samples.begin() + static_cast<long>(i0),
                        rec.samples.begin() + static_cast<long>(i1));
  return extract_chew_descriptor(x, fs);
}

Standardizer fit_standardizer_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2)
    throw std::runtime_error("standardizer needs at least 2 rows");
  const size_t dim = rows[0].size();
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.std.assign(dim, 0.0);
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    if (r.size() != dim) throw std::runtime_error("descriptor dimension mismatch");
    for (size_t j = 0; j < dim; ++j) s.mean[j] += r[j];
  }
  for (size_t j = 0; j < dim; ++j) s.mean[j] /= n;
  for (const auto& r : rows)
    for (size_t j = 0; j < dim; ++j) {
      const double c = r[j] - s.mean[j];
      s.std[j] += c * c;
    }
  for (size_t j = 0; j < dim; ++j) {
    s.std[j] = std::sqrt(s.std[j] / (n - 1.0));
    if (s.std[j] < 1e-12) s.std[j] = 1.0;  // degenerate dimension passes through
  }
  return s;
}

Standardizer fit_standardizer(const std::vector<ChewDescriptor>& train) {
  std::vector<std::vector<double>> rows;
  rows.reserve(train.size());
  for (const auto& d : train) rows.emplace_back(d.v.begin(), d.v.end());
  return fit_standardizer_rows(rows);
}

std::vector<double> apply_standardizer(const Standardizer& s, const std::vector<double>& x) {
  if (x.size() != s.mean.size())
    throw std::runtime_error("standardizer dimension mismatch");
  std::vector<double> out(x.size());
  for (size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - s.mean[j]) / s.std[j];
  return out;
}

ChewDescriptor apply_standardizer(const Standardizer& s, const ChewDescriptor& x) {
  if (s.dim() != kDescriptorDim)
    throw std::runtime_error("standardizer dimension mismatch");
  ChewDescriptor out;
  for (int j = 0; j < kDescriptorDim; ++j)
    out[j] = (x[j] - s.mean[static_cast<size_t>(j)]) / s.std[static_cast<size_t>(j)];
  return out;
}

}  // namespace biteweight
