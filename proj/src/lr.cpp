#include <stdexcept>

#include "biteweight/estimators.hpp"

namespace biteweight {

EstimatorModel lr_fit(const TrainSet& t) {
  const int n = static_cast<int>(t.X.rows());
  const int p = static_cast<int>(t.X.cols());
  if (n < 1) throw std::invalid_argument("lr_fit: empty training set");

  Eigen::MatrixXd A(n, p + 1);
  A.leftCols(p) = t.X;
  A.col(p).setOnes();

  Eigen::MatrixXd gram = A.transpose() * A;
  gram.diagonal().array() += 1e-8;
  const Eigen::VectorXd rhs = A.transpose() * t.y;
  const Eigen::VectorXd theta = gram.ldlt().solve(rhs);

  LrModel lm;
  lm.w = theta.head(p);
  lm.b = theta(p);

  EstimatorModel m;
  m.kind = EstimatorKind::LR;
  m.params = std::move(lm);
  return m;
}

}  // namespace biteweight
