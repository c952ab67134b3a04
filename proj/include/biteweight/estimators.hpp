#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace biteweight {

enum class EstimatorKind { LR, SVR, FFNN, GRNN };
const char* estimator_name(EstimatorKind k);
EstimatorKind estimator_from_name(const std::string& name);

struct TrainSet {
  Eigen::MatrixXd X;                // N x p
  Eigen::VectorXd y;                // bite weights, grams
  std::vector<std::string> groups;  // subject ids, split bookkeeping only
};

// --- linear regression ------------------------------------------------------

struct LrModel {
  Eigen::VectorXd w;
  double b = 0.0;
};

// --- epsilon-SVR, RBF kernel, SMO dual solver -------------------------------

struct SvrConfig {
  std::vector<int> c_exponents = {-2, -1, 0, 1, 2};      // C = 10^i
  std::vector<int> gamma_exponents = {-1, 0, 1, 2, 3};   // gamma = 10^i / p
  double epsilon = -1.0;      // < 0: derive 0.1 * sample std of targets
  double train_fraction = 0.7;
  uint64_t seed = 0;
  double tol = 1e-6;          // KKT stopping tolerance for SMO

  static SvrConfig defaults() { return {}; }
};

struct SvrModel {
  Eigen::MatrixXd support_X;  // all training rows (beta may be zero)
  Eigen::VectorXd beta;       // alpha - alpha*
  double b = 0.0;
  double C = 1.0, gamma = 1.0, epsilon = 0.1;
  bool converged = true;
};

// Raw SMO trainer with fixed hyper-parameters (also used by oracle tests).
SvrModel svr_train_smo(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       double C, double gamma, double epsilon, double tol = 1e-6);

// --- feed-forward network, BFGS on smoothed MAE -----------------------------

struct FfnnConfig {
  std::vector<std::pair<int, int>> architectures = {
      {2, 5}, {2, 10}, {2, 15}, {2, 20}, {3, 5}, {3, 10}, {3, 15}, {3, 20}};
  double learning_rate = 0.01;  // fallback step when the line search fails
  int max_epochs = 1000;
  double grad_tol = 1e-6;
  double smooth_mu = 1e-6;      // |r| ~ sqrt(r^2 + mu^2)
  double val_fraction = 0.1;
  uint64_t seed = 0;

  static FfnnConfig defaults() { return {}; }
};

// tanh hidden layers, linear output; theta holds (W, b) per layer, flattened.
struct FfnnNet {
  std::vector<int> layer_sizes;  // p, hidden..., 1

  explicit FfnnNet(std::vector<int> sizes) : layer_sizes(std::move(sizes)) {}
  int param_count() const;
  Eigen::VectorXd init_theta(uint64_t seed) const;  // uniform +-sqrt(6/(fan_in+fan_out))
  Eigen::VectorXd forward(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X) const;
  // smoothed-MAE loss and its gradient
  double value_and_grad(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y, double mu,
                        Eigen::VectorXd* grad) const;
};

struct FfnnModel {
  std::vector<int> layer_sizes;
  Eigen::VectorXd theta;
  int hidden_layers = 0, neurons = 0;
};

// Trains one network with BFGS from a seeded init (exposed for tests).
FfnnModel ffnn_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     int hidden_layers, int neurons, const FfnnConfig& cfg,
                     uint64_t init_seed);

// Init seed used by ffnn_fit for candidate `arch_index` (refit = final fit on
// the full training set). Exposed so the selection protocol can be replayed.
uint64_t ffnn_candidate_seed(uint64_t cfg_seed, size_t arch_index, bool refit);

// --- GRNN (Nadaraya-Watson with Gaussian kernel) ----------------------------

struct GrnnConfig {
  int sigma_grid_size = 20;
  double sigma_lo_factor = 1e-2;  // grid spans [lo, hi] * median pairwise distance
  double sigma_hi_factor = 1e2;
  double val_fraction = 0.1;
  uint64_t seed = 0;

  static GrnnConfig defaults() { return {}; }
};

struct GrnnModel {
  Eigen::MatrixXd X;  // stored exemplars
  Eigen::VectorXd y;
  double sigma = 1.0;
};

double grnn_predict(const GrnnModel& m, const Eigen::VectorXd& x);

// --- common fit/predict contract --------------------------------------------

struct EstimatorModel {
  EstimatorKind kind = EstimatorKind::LR;
  uint64_t seed = 0;
  double validation_mae = std::numeric_limits<double>::quiet_NaN();
  bool warning = false;  // e.g. SMO hit its iteration cap
  std::variant<LrModel, SvrModel, FfnnModel, GrnnModel> params;
};

// Least squares with bias via normal equations; ridge jitter 1e-8 on the
// Gram matrix guarantees solvability under rank deficiency.
EstimatorModel lr_fit(const TrainSet& t);

// Grid search over (C, gamma) on a seeded 70/30 bite-level split, winner by
// validation MAE, refit on the full training set.
EstimatorModel svr_fit(const TrainSet& t, const SvrConfig& cfg);

// Architecture search over the 8 candidates on a seeded 90/10 split, winner
// by validation MAE, refit on the full training set.
EstimatorModel ffnn_fit(const TrainSet& t, const FfnnConfig& cfg);

// Sigma grid selection on a seeded 90/10 split, then store all exemplars.
EstimatorModel grnn_fit(const TrainSet& t, const GrnnConfig& cfg);

double predict(const EstimatorModel& m, const Eigen::VectorXd& x);
Eigen::VectorXd predict_all(const EstimatorModel& m, const Eigen::MatrixXd& X);

std::string model_to_json(const EstimatorModel& m);
EstimatorModel model_from_json(const std::string& text);

// Seeded index split shared by the validation protocols: returns
// (train_idx, val_idx) with val_count = max(1, round(frac * N)).
std::pair<std::vector<int>, std::vector<int>> split_indices(int n, double val_fraction,
                                                            uint64_t seed);

}  // namespace biteweight
