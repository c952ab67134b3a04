#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "biteweight/estimators.hpp"

namespace biteweight {

double grnn_predict(const GrnnModel& m, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(m.X.rows());
  if (n == 0) throw std::runtime_error("grnn_predict: empty model");
  if (x.size() != m.X.cols()) throw std::invalid_argument("grnn_predict: dimension mismatch");

  Eigen::VectorXd d2 = (m.X.rowwise() - x.transpose()).rowwise().squaredNorm();
  const double dmin = d2.minCoeff();
  // shift by the nearest exemplar so at least one kernel weight is 1; when
  // everything else underflows this degrades to the nearest exemplar's target
  double wsum = 0.0, ysum = 0.0;
  const double inv = 1.0 / (2.0 * m.sigma * m.sigma);
  for (int i = 0; i < n; ++i) {
    const double w = std::exp(-(d2(i) - dmin) * inv);
    wsum += w;
    ysum += w * m.y(i);
  }
  return ysum / wsum;
}

namespace {

double median_pairwise_distance(const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  std::vector<double> d;
  d.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      d.push_back((X.row(i) - X.row(j)).norm());
  if (d.empty()) return 1.0;
  std::sort(d.begin(), d.end());
  const size_t m = d.size();
  double med = (m % 2 == 1) ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
  if (med <= 0.0) med = 1.0;
  return med;
}

}  // namespace

EstimatorModel grnn_fit(const TrainSet& t, const GrnnConfig& cfg) {
  const int n = static_cast<int>(t.X.rows());
  if (n < 2) throw std::invalid_argument("grnn_fit: need at least 2 rows");

  const double dmed = median_pairwise_distance(t.X);

  auto [train_idx, val_idx] = split_indices(n, cfg.val_fraction, cfg.seed);
  GrnnModel split_model;
  split_model.X.resize(static_cast<long>(train_idx.size()), t.X.cols());
  split_model.y.resize(static_cast<long>(train_idx.size()));
  for (size_t i = 0; i < train_idx.size(); ++i) {
    split_model.X.row(static_cast<long>(i)) = t.X.row(train_idx[i]);
    split_model.y(static_cast<long>(i)) = t.y(train_idx[i]);
  }

  const double lo = std::log10(cfg.sigma_lo_factor * dmed);
  const double hi = std::log10(cfg.sigma_hi_factor * dmed);
  double best_mae = std::numeric_limits<double>::infinity();
  double best_sigma = dmed;
  for (int j = 0; j < cfg.sigma_grid_size; ++j) {
    const double e =
        cfg.sigma_grid_size > 1
            ? lo + (hi - lo) * static_cast<double>(j) / (cfg.sigma_grid_size - 1)
            : lo;
    split_model.sigma = std::pow(10.0, e);
    double mae = 0.0;
    for (int vi : val_idx)
      mae += std::fabs(grnn_predict(split_model, t.X.row(vi).transpose()) - t.y(vi));
    mae /= static_cast<double>(val_idx.size());
    if (mae < best_mae) {
      best_mae = mae;
      best_sigma = split_model.sigma;
    }
  }

  GrnnModel gm;
  gm.X = t.X;
  gm.y = t.y;
  gm.sigma = best_sigma;

  EstimatorModel m;
  m.kind = EstimatorKind::GRNN;
  m.seed = cfg.seed;
  m.validation_mae = best_mae;
  m.params = std::move(gm);
  return m;
}

}  // namespace biteweight
