#include <cmath>
#include <numeric>
#include <stdexcept>

#include "biteweight/estimators.hpp"
#include "biteweight/rng.hpp"
#include "json.hpp"

using ordered_json = nlohmann::ordered_json;

namespace biteweight {

const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::LR: return "LR";
    case EstimatorKind::SVR: return "SVR";
    case EstimatorKind::FFNN: return "FFNN";
    case EstimatorKind::GRNN: return "GRNN";
  }
  return "?";
}

EstimatorKind estimator_from_name(const std::string& name) {
  for (EstimatorKind k : {EstimatorKind::LR, EstimatorKind::SVR,
                          EstimatorKind::FFNN, EstimatorKind::GRNN})
    if (name == estimator_name(k)) return k;
  throw std::runtime_error("unknown estimator: '" + name + "'");
}

std::pair<std::vector<int>, std::vector<int>> split_indices(int n, double val_fraction,
                                                            uint64_t seed) {
  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, {0x5b117u}));
  rng.shuffle(idx);
  int n_val = static_cast<int>(std::lround(val_fraction * n));
  if (n_val < 1) n_val = 1;
  if (n_val > n - 1) n_val = n - 1;
  std::vector<int> val(idx.begin(), idx.begin() + n_val);
  std::vector<int> train(idx.begin() + n_val, idx.end());
  return {train, val};
}

namespace {

Eigen::MatrixXd rbf_cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          double gamma) {
  Eigen::VectorXd an = A.rowwise().squaredNorm();
  Eigen::VectorXd bn = B.rowwise().squaredNorm();
  Eigen::MatrixXd D = -2.0 * (A * B.transpose());
  D.colwise() += an;
  D.rowwise() += bn.transpose();
  return (-gamma * D.cwiseMax(0.0)).array().exp();
}

}  // namespace

double predict(const EstimatorModel& m, const Eigen::VectorXd& x) {
  switch (m.kind) {
    case EstimatorKind::LR: {
      const auto& lm = std::get<LrModel>(m.params);
      if (x.size() != lm.w.size())
        throw std::invalid_argument("predict: dimension mismatch");
      return lm.w.dot(x) + lm.b;
    }
    case EstimatorKind::SVR: {
      const auto& sm = std::get<SvrModel>(m.params);
      if (x.size() != sm.support_X.cols())
        throw std::invalid_argument("predict: dimension mismatch");
      const Eigen::MatrixXd k =
          rbf_cross(x.transpose(), sm.support_X, sm.gamma);
      return (k * sm.beta)(0) + sm.b;
    }
    case EstimatorKind::FFNN: {
      const auto& fm = std::get<FfnnModel>(m.params);
      if (x.size() != fm.layer_sizes.front())
        throw std::invalid_argument("predict: dimension mismatch");
      FfnnNet net(fm.layer_sizes);
      return net.forward(fm.theta, x.transpose())(0);
    }
    case EstimatorKind::GRNN:
      return grnn_predict(std::get<GrnnModel>(m.params), x);
  }
  throw std::logic_error("predict: bad estimator kind");
}

Eigen::VectorXd predict_all(const EstimatorModel& m, const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (long i = 0; i < X.rows(); ++i) out(i) = predict(m, X.row(i).transpose());
  return out;
}

namespace {

ordered_json vec_to_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json mat_to_json(const Eigen::MatrixXd& m) {
  ordered_json a = ordered_json::array();
  for (long r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

Eigen::VectorXd vec_from_json(const ordered_json& a) {
  Eigen::VectorXd v(static_cast<long>(a.size()));
  for (size_t i = 0; i < a.size(); ++i) v(static_cast<long>(i)) = a[i];
  return v;
}

Eigen::MatrixXd mat_from_json(const ordered_json& a) {
  const long rows = static_cast<long>(a.size());
  const long cols = rows > 0 ? static_cast<long>(a[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      m(r, c) = a[static_cast<size_t>(r)][static_cast<size_t>(c)];
  return m;
}

}  // namespace

std::string model_to_json(const EstimatorModel& m) {
  ordered_json j;
  j["kind"] = estimator_name(m.kind);
  ordered_json hyper = ordered_json::object();
  ordered_json params = ordered_json::object();
  switch (m.kind) {
    case EstimatorKind::LR: {
      const auto& lm = std::get<LrModel>(m.params);
      params["w"] = vec_to_json(lm.w);
      params["b"] = lm.b;
      break;
    }
    case EstimatorKind::SVR: {
      const auto& sm = std::get<SvrModel>(m.params);
      hyper["C"] = sm.C;
      hyper["gamma"] = sm.gamma;
      hyper["epsilon"] = sm.epsilon;
      params["beta"] = vec_to_json(sm.beta);
      params["b"] = sm.b;
      params["support_X"] = mat_to_json(sm.support_X);
      params["converged"] = sm.converged;
      break;
    }
    case EstimatorKind::FFNN: {
      const auto& fm = std::get<FfnnModel>(m.params);
      hyper["hidden_layers"] = fm.hidden_layers;
      hyper["neurons"] = fm.neurons;
      params["layer_sizes"] = fm.layer_sizes;
      params["theta"] = vec_to_json(fm.theta);
      break;
    }
    case EstimatorKind::GRNN: {
      const auto& gm = std::get<GrnnModel>(m.params);
      hyper["sigma"] = gm.sigma;
      params["X"] = mat_to_json(gm.X);
      params["y"] = vec_to_json(gm.y);
      break;
    }
  }
  j["hyper_parameters"] = std::move(hyper);
  j["parameters"] = std::move(params);
  j["seed"] = m.seed;
  if (std::isnan(m.validation_mae))
    j["validation_mae"] = nullptr;
  else
    j["validation_mae"] = m.validation_mae;
  j["warning"] = m.warning;
  return j.dump(2);
}

EstimatorModel model_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  EstimatorModel m;
  m.kind = estimator_from_name(j.at("kind").get<std::string>());
  m.seed = j.at("seed").get<uint64_t>();
  if (j.contains("validation_mae") && !j["validation_mae"].is_null())
    m.validation_mae = j["validation_mae"];
  if (j.contains("warning")) m.warning = j["warning"];
  const auto& params = j.at("parameters");
  const auto& hyper = j.at("hyper_parameters");
  switch (m.kind) {
    case EstimatorKind::LR: {
      LrModel lm;
      lm.w = vec_from_json(params.at("w"));
      lm.b = params.at("b");
      m.params = std::move(lm);
      break;
    }
    case EstimatorKind::SVR: {
      SvrModel sm;
      sm.C = hyper.at("C");
      sm.gamma = hyper.at("gamma");
      sm.epsilon = hyper.at("epsilon");
      sm.beta = vec_from_json(params.at("beta"));
      sm.b = params.at("b");
      sm.support_X = mat_from_json(params.at("support_X"));
      sm.converged = params.at("converged");
      m.params = std::move(sm);
      break;
    }
    case EstimatorKind::FFNN: {
      FfnnModel fm;
      fm.hidden_layers = hyper.at("hidden_layers");
      fm.neurons = hyper.at("neurons");
      fm.layer_sizes = params.at("layer_sizes").get<std::vector<int>>();
      fm.theta = vec_from_json(params.at("theta"));
      m.params = std::move(fm);
      break;
    }
    case EstimatorKind::GRNN: {
      GrnnModel gm;
      gm.sigma = hyper.at("sigma");
      gm.X = mat_from_json(params.at("X"));
      gm.y = vec_from_json(params.at("y"));
      m.params = std::move(gm);
      break;
    }
  }
  return m;
}

}  // namespace biteweight
