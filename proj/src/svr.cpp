#include <cmath>
#include <limits>
#include <stdexcept>

#include "biteweight/estimators.hpp"
#include "biteweight/rng.hpp"

namespace biteweight {

namespace {

constexpr double kTau = 1e-12;

// Dual of epsilon-SVR over 2N variables theta = [alpha; alpha*]:
//   min 1/2 theta' Q theta + p' theta,  0 <= theta <= C,  z' theta = 0
// with z = [+1...,-1...], Q[s][t] = z_s z_t K(s%N, t%N),
// p[i] = eps - y[i], p[i+N] = eps + y[i]. Maximal-violating-pair SMO.
struct SmoSolver {
  const Eigen::MatrixXd& K;
  const Eigen::VectorXd& y;
  double C, eps, tol;
  int n;
  std::vector<double> theta, G;
  std::vector<int8_t> z;
  bool converged = true;

  SmoSolver(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& targets,
            double C_, double eps_, double tol_)
      : K(kernel), y(targets), C(C_), eps(eps_), tol(tol_),
        n(static_cast<int>(targets.size())) {
    theta.assign(static_cast<size_t>(2 * n), 0.0);
    G.resize(static_cast<size_t>(2 * n));
    z.resize(static_cast<size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
      G[static_cast<size_t>(i)] = eps - y(i);
      G[static_cast<size_t>(i + n)] = eps + y(i);
      z[static_cast<size_t>(i)] = 1;
      z[static_cast<size_t>(i + n)] = -1;
    }
  }

  double q(int s, int t) const {
    return static_cast<double>(z[static_cast<size_t>(s)]) *
           static_cast<double>(z[static_cast<size_t>(t)]) * K(s % n, t % n);
  }

  bool select_pair(int& out_i, int& out_j) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    int i = -1, j = -1;
    for (int t = 0; t < 2 * n; ++t) {
      const double zg = -static_cast<double>(z[static_cast<size_t>(t)]) *
                        G[static_cast<size_t>(t)];
      const bool up = z[static_cast<size_t>(t)] == 1
                          ? theta[static_cast<size_t>(t)] < C
                          : theta[static_cast<size_t>(t)] > 0.0;
      const bool down = z[static_cast<size_t>(t)] == 1
                            ? theta[static_cast<size_t>(t)] > 0.0
                            : theta[static_cast<size_t>(t)] < C;
      if (up && zg > gmax) {
        gmax = zg;
        i = t;
      }
      if (down && zg < gmin) {
        gmin = zg;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < tol) return false;
    out_i = i;
    out_j = j;
    return true;
  }

  void solve() {
    const int64_t max_iter =
        std::max<int64_t>(1000000, static_cast<int64_t>(n) * 10000);
    int64_t iter = 0;
    int i, j;
    while (iter < max_iter && select_pair(i, j)) {
      ++iter;
      const double old_i = theta[static_cast<size_t>(i)];
      const double old_j = theta[static_cast<size_t>(j)];

      if (z[static_cast<size_t>(i)] != z[static_cast<size_t>(j)]) {
        double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
        if (quad <= 0.0) quad = kTau;
        const double delta =
            (-G[static_cast<size_t>(i)] - G[static_cast<size_t>(j)]) / quad;
        const double diff = old_i - old_j;
        theta[static_cast<size_t>(i)] += delta;
        theta[static_cast<size_t>(j)] += delta;
        if (diff > 0.0) {
          if (theta[static_cast<size_t>(j)] < 0.0) {
            theta[static_cast<size_t>(j)] = 0.0;
            theta[static_cast<size_t>(i)] = diff;
          }
        } else {
          if (theta[static_cast<size_t>(i)] < 0.0) {
            theta[static_cast<size_t>(i)] = 0.0;
            theta[static_cast<size_t>(j)] = -diff;
          }
        }
        if (diff > 0.0) {
          if (theta[static_cast<size_t>(i)] > C) {
            theta[static_cast<size_t>(i)] = C;
            theta[static_cast<size_t>(j)] = C - diff;
          }
        } else {
          if (theta[static_cast<size_t>(j)] > C) {
            theta[static_cast<size_t>(j)] = C;
            theta[static_cast<size_t>(i)] = C + diff;
          }
        }
      } else {
        double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
        if (quad <= 0.0) quad = kTau;
        const double delta =
            (G[static_cast<size_t>(i)] - G[static_cast<size_t>(j)]) / quad;
        const double sum = old_i + old_j;
        theta[static_cast<size_t>(i)] -= delta;
        theta[static_cast<size_t>(j)] += delta;
        if (sum > C) {
          if (theta[static_cast<size_t>(i)] > C) {
            theta[static_cast<size_t>(i)] = C;
            theta[static_cast<size_t>(j)] = sum - C;
          }
        } else {
          if (theta[static_cast<size_t>(j)] < 0.0) {
            theta[static_cast<size_t>(j)] = 0.0;
            theta[static_cast<size_t>(i)] = sum;
          }
        }
        if (sum > C) {
          if (theta[static_cast<size_t>(j)] > C) {
            theta[static_cast<size_t>(j)] = C;
            theta[static_cast<size_t>(i)] = sum - C;
          }
        } else {
          if (theta[static_cast<size_t>(i)] < 0.0) {
            theta[static_cast<size_t>(i)] = 0.0;
            theta[static_cast<size_t>(j)] = sum;
          }
        }
      }

      const double di = theta[static_cast<size_t>(i)] - old_i;
      const double dj = theta[static_cast<size_t>(j)] - old_j;
      if (di == 0.0 && dj == 0.0) break;  // numerically stuck pair
      for (int t = 0; t < 2 * n; ++t)
        G[static_cast<size_t>(t)] += q(t, i) * di + q(t, j) * dj;
    }
    int a, b2;
    converged = !select_pair(a, b2);
  }

  double bias() const {
    // midpoint of the feasible interval, or the mean over free variables
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int n_free = 0;
    for (int t = 0; t < 2 * n; ++t) {
      const double zg = static_cast<double>(z[static_cast<size_t>(t)]) *
                        G[static_cast<size_t>(t)];
      if (theta[static_cast<size_t>(t)] >= C) {
        if (z[static_cast<size_t>(t)] == -1)
          ub = std::min(ub, zg);
        else
          lb = std::max(lb, zg);
      } else if (theta[static_cast<size_t>(t)] <= 0.0) {
        if (z[static_cast<size_t>(t)] == 1)
          ub = std::min(ub, zg);
        else
          lb = std::max(lb, zg);
      } else {
        ++n_free;
        sum_free += zg;
      }
    }
    const double rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;
    return -rho;
  }
};

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           double gamma) {
  Eigen::VectorXd an = A.rowwise().squaredNorm();
  Eigen::VectorXd bn = B.rowwise().squaredNorm();
  Eigen::MatrixXd D = -2.0 * (A * B.transpose());
  D.colwise() += an;
  D.rowwise() += bn.transpose();
  return (-gamma * D.cwiseMax(0.0)).array().exp();
}

double default_epsilon(const Eigen::VectorXd& y) {
  const int n = static_cast<int>(y.size());
  if (n < 2) return 0.0;
  const double mean = y.mean();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += (y(i) - mean) * (y(i) - mean);
  return 0.1 * std::sqrt(s / (n - 1));
}

}  // namespace

SvrModel svr_train_smo(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       double C, double gamma, double epsilon, double tol) {
  const Eigen::MatrixXd K = rbf_kernel(X, X, gamma);
  SmoSolver solver(K, y, C, epsilon, tol);
  solver.solve();

  SvrModel m;
  m.support_X = X;
  m.beta.resize(y.size());
  const int n = static_cast<int>(y.size());
  for (int i = 0; i < n; ++i)
    m.beta(i) = solver.theta[static_cast<size_t>(i)] -
                solver.theta[static_cast<size_t>(i + n)];
  m.b = solver.bias();
  m.C = C;
  m.gamma = gamma;
  m.epsilon = epsilon;
  m.converged = solver.converged;
  return m;
}

EstimatorModel svr_fit(const TrainSet& t, const SvrConfig& cfg) {
  const int n = static_cast<int>(t.X.rows());
  const int p = static_cast<int>(t.X.cols());
  if (n < 4) throw std::invalid_argument("svr_fit: need at least 4 rows");

  const double epsilon = cfg.epsilon >= 0.0 ? cfg.epsilon : default_epsilon(t.y);

  auto [train_idx, val_idx] = split_indices(n, 1.0 - cfg.train_fraction, cfg.seed);
  Eigen::MatrixXd Xtr(static_cast<long>(train_idx.size()), p);
  Eigen::VectorXd ytr(static_cast<long>(train_idx.size()));
  for (size_t i = 0; i < train_idx.size(); ++i) {
    Xtr.row(static_cast<long>(i)) = t.X.row(train_idx[i]);
    ytr(static_cast<long>(i)) = t.y(train_idx[i]);
  }
  Eigen::MatrixXd Xval(static_cast<long>(val_idx.size()), p);
  Eigen::VectorXd yval(static_cast<long>(val_idx.size()));
  for (size_t i = 0; i < val_idx.size(); ++i) {
    Xval.row(static_cast<long>(i)) = t.X.row(val_idx[i]);
    yval(static_cast<long>(i)) = t.y(val_idx[i]);
  }

  double best_mae = std::numeric_limits<double>::infinity();
  double best_C = 1.0, best_gamma = 1.0;
  for (int ci : cfg.c_exponents) {
    const double C = std::pow(10.0, ci);
    for (int gi : cfg.gamma_exponents) {
      const double gamma = std::pow(10.0, gi) / p;
      const SvrModel cand = svr_train_smo(Xtr, ytr, C, gamma, epsilon, cfg.tol);
      const Eigen::VectorXd pred =
          rbf_kernel(Xval, Xtr, gamma) * cand.beta +
          Eigen::VectorXd::Constant(Xval.rows(), cand.b);
      const double mae = (pred - yval).cwiseAbs().mean();
      if (mae < best_mae) {
        best_mae = mae;
        best_C = C;
        best_gamma = gamma;
      }
    }
  }

  SvrModel final_model = svr_train_smo(t.X, t.y, best_C, best_gamma, epsilon, cfg.tol);

  EstimatorModel m;
  m.kind = EstimatorKind::SVR;
  m.seed = cfg.seed;
  m.validation_mae = best_mae;
  m.warning = !final_model.converged;
  m.params = std::move(final_model);
  return m;
}

}  // namespace biteweight
