#include <stdexcept>

#include <Eigen/Dense>

#include "preflab/ml/regressors.hpp"

namespace preflab::ml {

namespace {

struct Centered {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::RowVectorXd x_mean;
  double y_mean = 0.0;
};

Centered center(const DesignMatrix& D) {
  if (D.rows() == 0) throw std::invalid_argument("cannot fit a linear model on zero rows");
  const auto n = static_cast<Eigen::Index>(D.rows());
  const auto p = static_cast<Eigen::Index>(D.cols());
  Centered c;
  c.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      D.values().data(), n, p);
  c.y = Eigen::Map<const Eigen::VectorXd>(D.target().data(), n);
  c.x_mean = c.X.colwise().mean();
  c.y_mean = c.y.mean();
  c.X.rowwise() -= c.x_mean;
  c.y.array() -= c.y_mean;
  return c;
}

LinearParams finish(const Centered& c, const Eigen::VectorXd& w, bool rank_deficient) {
  LinearParams lp;
  lp.coefficients.assign(w.data(), w.data() + w.size());
  lp.intercept = c.y_mean - (w.size() ? c.x_mean.dot(w) : 0.0);
  lp.rank_deficient = rank_deficient;
  return lp;
}

}  // namespace

FittedModel fit_ols(const DesignMatrix& D) {
  auto c = center(D);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(c.X.cols());
  bool deficient = false;
  if (c.X.cols() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(c.X);
    w = cod.solve(c.y);
    deficient = cod.rank() < c.X.cols();
  }
  return FittedModel(ModelKind::Ols, D.columns(), std::monostate{}, finish(c, w, deficient));
}

FittedModel fit_ridge(const DesignMatrix& D, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("ridge alpha must be non-negative");
  auto c = center(D);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(c.X.cols());
  if (c.X.cols() > 0) {
    Eigen::MatrixXd gram = c.X.transpose() * c.X;
    gram.diagonal().array() += alpha;
    w = gram.ldlt().solve(c.X.transpose() * c.y);
  }
  return FittedModel(ModelKind::Ridge, D.columns(), RidgeParams{alpha}, finish(c, w, false));
}

}  // namespace preflab::ml
