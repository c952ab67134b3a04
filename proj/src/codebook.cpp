#include "biteweight/codebook.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "biteweight/rng.hpp"
#include "json.hpp"

using ordered_json = nlohmann::ordered_json;

namespace biteweight {

namespace {

constexpr int kRestarts = 10;
constexpr int kMaxIters = 100;
constexpr double kSseTol = 1e-6;

// Likelihood weight of the AIC code-length criterion. The per-point form
// (weight independent of N) is required for the criterion to have a finite
// stopping point: with the likelihood scaled by N the in-sample SSE gain of
// an extra centroid always exceeds the parameter penalty and the scan
// degenerates to k = k_max.
constexpr double kAicLikelihoodWeight = 4.0;

// squared distances point-to-centroid via |x|^2 + |c|^2 - 2 x.c
Eigen::MatrixXd sq_dists(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C) {
  Eigen::VectorXd xn = X.rowwise().squaredNorm();
  Eigen::VectorXd cn = C.rowwise().squaredNorm();
  Eigen::MatrixXd D = -2.0 * (X * C.transpose());
  D.colwise() += xn;
  D.rowwise() += cn.transpose();
  return D.cwiseMax(0.0);
}

// nearest centroid, ties to the lowest index
int nearest(const Eigen::MatrixXd& D, int row, int k) {
  int best = 0;
  double bd = D(row, 0);
  for (int j = 1; j < k; ++j)
    if (D(row, j) < bd) {
      bd = D(row, j);
      best = j;
    }
  return best;
}

Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& X, int k, Rng& rng) {
  const int n = static_cast<int>(X.rows());
  Eigen::MatrixXd C(k, X.cols());
  const int first = static_cast<int>(rng.uniform_int(0, n - 1));
  C.row(0) = X.row(first);
  Eigen::VectorXd d2 = (X.rowwise() - C.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    int pick;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.uniform_int(0, n - 1));
    }
    C.row(j) = X.row(pick);
    d2 = d2.cwiseMin((X.rowwise() - C.row(j)).rowwise().squaredNorm());
  }
  return C;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& X, int k, uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (n < k) throw std::invalid_argument("kmeans: fewer points than centroids");

  KmeansResult best;
  best.sse = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < kRestarts; ++restart) {
    Rng rng(derive_seed(seed, {static_cast<uint64_t>(restart)}));
    Eigen::MatrixXd C = kmeanspp_init(X, k, rng);
    std::vector<int> assign(static_cast<size_t>(n), 0);
    std::vector<double> trace;
    double prev_sse = std::numeric_limits<double>::infinity();
    double sse = prev_sse;

    for (int iter = 0; iter < kMaxIters; ++iter) {
      Eigen::MatrixXd D = sq_dists(X, C);
      sse = 0.0;
      for (int i = 0; i < n; ++i) {
        assign[static_cast<size_t>(i)] = nearest(D, i, k);
        sse += D(i, assign[static_cast<size_t>(i)]);
      }
      trace.push_back(sse);
      if (prev_sse - sse < kSseTol) break;
      prev_sse = sse;

      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
      std::vector<int> counts(static_cast<size_t>(k), 0);
      for (int i = 0; i < n; ++i) {
        sums.row(assign[static_cast<size_t>(i)]) += X.row(i);
        counts[static_cast<size_t>(assign[static_cast<size_t>(i)])]++;
      }
      for (int j = 0; j < k; ++j) {
        if (counts[static_cast<size_t>(j)] > 0) {
          C.row(j) = sums.row(j) / counts[static_cast<size_t>(j)];
        } else {
          // re-seed an empty cluster to the farthest point
          int far = 0;
          double fd = -1.0;
          for (int i = 0; i < n; ++i) {
            const double di = D(i, assign[static_cast<size_t>(i)]);
            if (di > fd) {
              fd = di;
              far = i;
            }
          }
          C.row(j) = X.row(far);
        }
      }
    }

    // final assignment pass so (centroids, assignments, sse) are consistent
    Eigen::MatrixXd D = sq_dists(X, C);
    sse = 0.0;
    for (int i = 0; i < n; ++i) {
      assign[static_cast<size_t>(i)] = nearest(D, i, k);
      sse += D(i, assign[static_cast<size_t>(i)]);
    }

    if (sse < best.sse) {
      best.centroids = std::move(C);
      best.assignments = std::move(assign);
      best.sse = sse;
      best.sse_trace = std::move(trace);
    }
  }
  return best;
}

Codebook select_k_aic(const Eigen::MatrixXd& X, int k_max, uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (n < 2) throw std::invalid_argument("select_k_aic: need at least 2 points");
  if (k_max < 1) throw std::invalid_argument("select_k_aic: k_max must be >= 1");

  const int k_hi = std::min(k_max, n);
  Codebook cb;
  cb.d = d;
  cb.seed = seed;

  double best_aic = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_hi; ++k) {
    KmeansResult r = kmeans(X, k, derive_seed(seed, {0xa1c0u, static_cast<uint64_t>(k)}));
    double sigma2 = r.sse / (static_cast<double>(n) * d);
    if (sigma2 < 1e-30) sigma2 = 1e-30;
    const double avg_nll =
        0.5 * d * (std::log(2.0 * M_PI * sigma2) + 1.0);  // per-point
    const double aic = 2.0 * (static_cast<double>(k) * d + 1.0) +
                       2.0 * kAicLikelihoodWeight * avg_nll;
    cb.aic_curve.push_back(aic);
    if (aic < best_aic) {
      best_aic = aic;
      cb.k = k;
      cb.centroids = std::move(r.centroids);
    }
  }
  return cb;
}

std::vector<double> encode_bow(const Codebook& cb, const Eigen::MatrixXd& descriptors) {
  if (descriptors.rows() < 1) throw std::invalid_argument("encode_bow: empty descriptor set");
  if (descriptors.cols() != cb.d) throw std::invalid_argument("encode_bow: dimension mismatch");
  std::vector<double> hist(static_cast<size_t>(cb.k), 0.0);
  Eigen::MatrixXd D = sq_dists(descriptors, cb.centroids);
  const int n = static_cast<int>(descriptors.rows());
  for (int i = 0; i < n; ++i) hist[static_cast<size_t>(nearest(D, i, cb.k))] += 1.0;
  for (auto& h : hist) h /= static_cast<double>(n);
  return hist;
}

std::vector<double> encode_vlad(const Codebook& cb, const Eigen::MatrixXd& descriptors) {
  if (descriptors.rows() < 1) throw std::invalid_argument("encode_vlad: empty descriptor set");
  if (descriptors.cols() != cb.d) throw std::invalid_argument("encode_vlad: dimension mismatch");
  const int n = static_cast<int>(descriptors.rows());
  Eigen::MatrixXd resid = Eigen::MatrixXd::Zero(cb.k, cb.d);
  Eigen::MatrixXd D = sq_dists(descriptors, cb.centroids);
  for (int i = 0; i < n; ++i) {
    const int j = nearest(D, i, cb.k);
    resid.row(j) += descriptors.row(i) - cb.centroids.row(j);
  }
  for (int j = 0; j < cb.k; ++j) {
    const double norm = resid.row(j).norm();
    if (norm > 0.0) resid.row(j) /= norm;
  }
  std::vector<double> out(static_cast<size_t>(cb.k * cb.d));
  double total = 0.0;
  for (int j = 0; j < cb.k; ++j)
    for (int c = 0; c < cb.d; ++c) {
      const double v = resid(j, c);
      out[static_cast<size_t>(j * cb.d + c)] = v;
      total += v * v;
    }
  if (total > 0.0) {
    const double inv = 1.0 / std::sqrt(total);
    for (auto& v : out) v *= inv;
  }
  return out;
}

std::string codebook_to_json(const Codebook& cb) {
  ordered_json j;
  j["k"] = cb.k;
  j["d"] = cb.d;
  j["mode"] = cb.mode == EncodingMode::BoW ? "bow" : "vlad";
  j["centroids"] = ordered_json::array();
  for (int r = 0; r < cb.k; ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < cb.d; ++c) row.push_back(cb.centroids(r, c));
    j["centroids"].push_back(std::move(row));
  }
  j["seed"] = cb.seed;
  j["aic_curve"] = cb.aic_curve;
  return j.dump(2);
}

Codebook codebook_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  Codebook cb;
  cb.k = j.at("k");
  cb.d = j.at("d");
  cb.mode = j.at("mode") == "vlad" ? EncodingMode::VLAD : EncodingMode::BoW;
  cb.centroids.resize(cb.k, cb.d);
  for (int r = 0; r < cb.k; ++r)
    for (int c = 0; c < cb.d; ++c)
      cb.centroids(r, c) = j.at("centroids")[static_cast<size_t>(r)][static_cast<size_t>(c)];
  cb.seed = j.at("seed").get<uint64_t>();
  cb.aic_curve = j.at("aic_curve").get<std::vector<double>>();
  return cb;
}

}  // namespace biteweight
