#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace biteweight {

enum class EncodingMode { BoW, VLAD };

struct KmeansResult {
  Eigen::MatrixXd centroids;      // k x d
  std::vector<int> assignments;   // size N
  double sse = 0.0;
  std::vector<double> sse_trace;  // per-Lloyd-iteration SSE of the winning restart
};

// Lloyd with k-means++ seeding, 10 restarts, at most 100 iterations each,
// convergence when the SSE improvement drops below 1e-6. Empty clusters are
// re-seeded to the point farthest from its centroid. Deterministic in seed.
// Throws when N < k.
KmeansResult kmeans(const Eigen::MatrixXd& X, int k, uint64_t seed);

struct Codebook {
  Eigen::MatrixXd centroids;  // k x d
  int k = 0;
  int d = 0;
  EncodingMode mode = EncodingMode::BoW;
  uint64_t seed = 0;
  std::vector<double> aic_curve;  // AIC for k = 1..k_scanned
};

// Scans k = 1..min(k_max, N), fits k-means per k, and picks the k minimizing
// a penalized per-point Gaussian code length (ties go to the smaller k).
Codebook select_k_aic(const Eigen::MatrixXd& X, int k_max, uint64_t seed);

// Normalized nearest-centroid histogram (ties to the lowest centroid index).
std::vector<double> encode_bow(const Codebook& cb, const Eigen::MatrixXd& descriptors);

// Per-centroid residual sums with per-block and global L2 normalization
// (zero blocks and the all-zero vector stay zero).
std::vector<double> encode_vlad(const Codebook& cb, const Eigen::MatrixXd& descriptors);

std::string codebook_to_json(const Codebook& cb);
Codebook codebook_from_json(const std::string& text);

}  // namespace biteweight
