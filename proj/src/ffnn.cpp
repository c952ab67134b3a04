#include <cmath>
#include <limits>
#include <stdexcept>

#include "biteweight/estimators.hpp"
#include "biteweight/rng.hpp"

namespace biteweight {

int FfnnNet::param_count() const {
  int n = 0;
  for (size_t l = 1; l < layer_sizes.size(); ++l)
    n += layer_sizes[l] * layer_sizes[l - 1] + layer_sizes[l];
  return n;
}

Eigen::VectorXd FfnnNet::init_theta(uint64_t seed) const {
  Rng rng(seed);
  Eigen::VectorXd theta(param_count());
  int off = 0;
  for (size_t l = 1; l < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l - 1];
    const int fan_out = layer_sizes[l];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out * fan_in; ++i)
      theta(off + i) = rng.uniform(-bound, bound);
    off += fan_out * fan_in;
    for (int i = 0; i < fan_out; ++i) theta(off + i) = 0.0;
    off += fan_out;
  }
  return theta;
}

namespace {

struct LayerView {
  Eigen::Map<const Eigen::MatrixXd> W;
  Eigen::Map<const Eigen::VectorXd> b;
};

std::vector<LayerView> view_layers(const std::vector<int>& sizes,
                                   const Eigen::VectorXd& theta) {
  std::vector<LayerView> out;
  int off = 0;
  for (size_t l = 1; l < sizes.size(); ++l) {
    const int in = sizes[l - 1], o = sizes[l];
    out.push_back({Eigen::Map<const Eigen::MatrixXd>(theta.data() + off, o, in),
                   Eigen::Map<const Eigen::VectorXd>(theta.data() + off + o * in, o)});
    off += o * in + o;
  }
  return out;
}

}  // namespace

Eigen::VectorXd FfnnNet::forward(const Eigen::VectorXd& theta,
                                 const Eigen::MatrixXd& X) const {
  const auto layers = view_layers(layer_sizes, theta);
  Eigen::MatrixXd a = X.transpose();  // units x samples
  for (size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd zm = layers[l].W * a;
    zm.colwise() += layers[l].b;
    if (l + 1 < layers.size())
      a = zm.array().tanh();
    else
      a = std::move(zm);
  }
  return a.row(0).transpose();
}

double FfnnNet::value_and_grad(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y, double mu,
                               Eigen::VectorXd* grad) const {
  const auto layers = view_layers(layer_sizes, theta);
  const int n = static_cast<int>(X.rows());
  const size_t nl = layers.size();

  std::vector<Eigen::MatrixXd> acts;  // activations per layer, units x samples
  acts.reserve(nl + 1);
  acts.push_back(X.transpose());
  for (size_t l = 0; l < nl; ++l) {
    Eigen::MatrixXd zm = layers[l].W * acts.back();
    zm.colwise() += layers[l].b;
    if (l + 1 < nl) zm = zm.array().tanh();
    acts.push_back(std::move(zm));
  }

  const Eigen::VectorXd r = acts.back().row(0).transpose() - y;
  const Eigen::VectorXd smooth = (r.array().square() + mu * mu).sqrt();
  const double loss = smooth.mean();
  if (grad == nullptr) return loss;

  grad->setZero(param_count());
  // delta of the linear output: dL/dpred
  Eigen::MatrixXd delta(1, n);
  delta.row(0) = (r.array() / smooth.array()).transpose() / static_cast<double>(n);

  int off_end = param_count();
  for (size_t l = nl; l-- > 0;) {
    const int in = layer_sizes[l], o = layer_sizes[l + 1];
    off_end -= o * in + o;
    Eigen::Map<Eigen::MatrixXd> gW(grad->data() + off_end, o, in);
    Eigen::Map<Eigen::VectorXd> gb(grad->data() + off_end + o * in, o);
    gW = delta * acts[l].transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = layers[l].W.transpose() * delta;
      delta = back.array() * (1.0 - acts[l].array().square());
    }
  }
  return loss;
}

FfnnModel ffnn_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     int hidden_layers, int neurons, const FfnnConfig& cfg,
                     uint64_t init_seed) {
  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(X.cols()));
  for (int l = 0; l < hidden_layers; ++l) sizes.push_back(neurons);
  sizes.push_back(1);
  FfnnNet net(sizes);

  Eigen::VectorXd theta = net.init_theta(init_seed);
  const int np = net.param_count();

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(np, np);
  Eigen::VectorXd g(np), g_new(np);
  double f = net.value_and_grad(theta, X, y, cfg.smooth_mu, &g);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    if (g.norm() < cfg.grad_tol) break;

    Eigen::VectorXd dir = -(H * g);
    double gd = g.dot(dir);
    if (!(gd < 0.0)) {  // H lost positive definiteness; restart from steepest descent
      H.setIdentity();
      dir = -g;
      gd = g.dot(dir);
    }

    // backtracking Armijo line search; on failure take a plain gradient step
    // scaled by the configured learning rate
    double t = 1.0;
    bool ok = false;
    Eigen::VectorXd theta_new;
    double f_new = f;
    for (int ls = 0; ls < 40; ++ls) {
      theta_new = theta + t * dir;
      f_new = net.value_and_grad(theta_new, X, y, cfg.smooth_mu, nullptr);
      if (f_new <= f + 1e-4 * t * gd) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) {
      theta_new = theta - cfg.learning_rate * g;
      f_new = net.value_and_grad(theta_new, X, y, cfg.smooth_mu, nullptr);
    }

    net.value_and_grad(theta_new, X, y, cfg.smooth_mu, &g_new);
    const Eigen::VectorXd s = theta_new - theta;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * yv;
      const double yHy = yv.dot(Hy);
      H.noalias() -= rho * (s * Hy.transpose() + Hy * s.transpose());
      H.noalias() += (rho * rho * yHy + rho) * (s * s.transpose());
    }

    theta = std::move(theta_new);
    g = g_new;
    f = f_new;
  }

  FfnnModel m;
  m.layer_sizes = sizes;
  m.theta = std::move(theta);
  m.hidden_layers = hidden_layers;
  m.neurons = neurons;
  return m;
}

uint64_t ffnn_candidate_seed(uint64_t cfg_seed, size_t arch_index, bool refit) {
  return refit ? derive_seed(cfg_seed, {0xf17u, arch_index})
               : derive_seed(cfg_seed, {0xa2c4u, arch_index});
}

EstimatorModel ffnn_fit(const TrainSet& t, const FfnnConfig& cfg) {
  const int n = static_cast<int>(t.X.rows());
  if (n < 10) throw std::invalid_argument("ffnn_fit: need at least 10 rows");

  auto [train_idx, val_idx] = split_indices(n, cfg.val_fraction, cfg.seed);
  Eigen::MatrixXd Xtr(static_cast<long>(train_idx.size()), t.X.cols());
  Eigen::VectorXd ytr(static_cast<long>(train_idx.size()));
  for (size_t i = 0; i < train_idx.size(); ++i) {
    Xtr.row(static_cast<long>(i)) = t.X.row(train_idx[i]);
    ytr(static_cast<long>(i)) = t.y(train_idx[i]);
  }
  Eigen::MatrixXd Xval(static_cast<long>(val_idx.size()), t.X.cols());
  Eigen::VectorXd yval(static_cast<long>(val_idx.size()));
  for (size_t i = 0; i < val_idx.size(); ++i) {
    Xval.row(static_cast<long>(i)) = t.X.row(val_idx[i]);
    yval(static_cast<long>(i)) = t.y(val_idx[i]);
  }

  double best_mae = std::numeric_limits<double>::infinity();
  int best_arch = 0;
  for (size_t a = 0; a < cfg.architectures.size(); ++a) {
    const auto [layers, neurons] = cfg.architectures[a];
    FfnnModel cand = ffnn_train(Xtr, ytr, layers, neurons, cfg,
                                ffnn_candidate_seed(cfg.seed, a, false));
    FfnnNet net(cand.layer_sizes);
    const Eigen::VectorXd pred = net.forward(cand.theta, Xval);
    const double mae = (pred - yval).cwiseAbs().mean();
    if (mae < best_mae) {
      best_mae = mae;
      best_arch = static_cast<int>(a);
    }
  }

  const auto [layers, neurons] = cfg.architectures[static_cast<size_t>(best_arch)];
  FfnnModel final_model =
      ffnn_train(t.X, t.y, layers, neurons, cfg,
                 ffnn_candidate_seed(cfg.seed, static_cast<size_t>(best_arch), true));

  EstimatorModel m;
  m.kind = EstimatorKind::FFNN;
  m.seed = cfg.seed;
  m.validation_mae = best_mae;
  m.params = std::move(final_model);
  return m;
}

}  // namespace biteweight
