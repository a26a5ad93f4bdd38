#include <cmath>

#include <Eigen/Cholesky>

#include "rmlal/eval.hpp"

namespace rmlal {

namespace {

double softplus(double z) {
  // log(1 + exp(z)) without overflow
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  return z > 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

RidgeLogistic fit_ridge_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                                 double reg) {
  const int l = static_cast<int>(X.rows());
  if (y.size() != l || l < 1) throw dimension_error("fit_ridge_logistic: shape mismatch");
  if (!(reg > 0.0)) throw config_error("fit_ridge_logistic: reg must be positive");

  // The minimizer lies in the row span of the design matrix, so Newton runs
  // in the l-dimensional dual: beta = Xt^T alpha with Xt = [X, 1].
  Eigen::MatrixXd design(l, X.cols() + 1);
  design.leftCols(X.cols()) = X;
  design.col(X.cols()).setOnes();
  const Eigen::MatrixXd gram = design * design.transpose();

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(l);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(l);

  const auto loss_at = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& fa) {
    double loss = 0.5 * reg * a.dot(fa);  // alpha^T G alpha = alpha . f
    for (int i = 0; i < l; ++i) loss += softplus(-static_cast<double>(y(i)) * fa(i));
    return loss;
  };

  RidgeLogistic model;
  double loss = loss_at(alpha, f);
  model.loss_trace.push_back(loss);

  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd g(l);
    Eigen::VectorXd w(l);
    for (int i = 0; i < l; ++i) {
      const double yi = static_cast<double>(y(i));
      g(i) = -yi * sigmoid(-yi * f(i));
      const double s = sigmoid(f(i));
      w(i) = s * (1.0 - s);
    }
    const Eigen::VectorXd grad = gram * (g + reg * alpha);
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-10) break;

    Eigen::MatrixXd hessian = gram * w.asDiagonal() * gram + reg * gram;
    hessian.diagonal().array() += 1e-12;
    const Eigen::VectorXd direction = Eigen::LDLT<Eigen::MatrixXd>(hessian).solve(-grad);

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Eigen::VectorXd candidate = alpha + step * direction;
      const Eigen::VectorXd f_candidate = gram * candidate;
      const double candidate_loss = loss_at(candidate, f_candidate);
      if (candidate_loss < loss) {
        alpha = candidate;
        f = f_candidate;
        loss = candidate_loss;
        model.loss_trace.push_back(loss);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    if (model.loss_trace.size() >= 2) {
      const std::size_t last = model.loss_trace.size() - 1;
      if (model.loss_trace[last - 1] - model.loss_trace[last] < 1e-12) break;
    }
  }

  const Eigen::VectorXd beta = design.transpose() * alpha;
  model.weights = beta.head(X.cols());
  model.intercept = beta(X.cols());
  return model;
}

Eigen::MatrixXi train_eval_classifier(const Eigen::MatrixXd& X_labeled,
                                      const Eigen::MatrixXi& y_labeled,
                                      const Eigen::MatrixXd& X_test) {
  const int l = static_cast<int>(X_labeled.rows());
  const int c = static_cast<int>(y_labeled.cols());
  if (l < 1) throw empty_dataset_error("train_eval_classifier: labeled set is empty");
  if (y_labeled.rows() != l) throw dimension_error("train_eval_classifier: label rows mismatch");
  if (X_test.cols() != X_labeled.cols()) {
    throw dimension_error("train_eval_classifier: feature dimensions differ");
  }

  Eigen::MatrixXi predictions(X_test.rows(), c);
  for (int k = 0; k < c; ++k) {
    const Eigen::VectorXi y_k = y_labeled.col(k);
    const bool has_pos = (y_k.array() == 1).any();
    const bool has_neg = (y_k.array() == -1).any();
    if (!has_pos || !has_neg) {
      predictions.col(k).setConstant(has_pos ? 1 : -1);
      continue;
    }
    const RidgeLogistic model = fit_ridge_logistic(X_labeled, y_k, 1.0);
    const Eigen::VectorXd decisions =
        (X_test * model.weights).array() + model.intercept;
    for (int i = 0; i < X_test.rows(); ++i) {
      predictions(i, k) = decisions(i) >= 0.0 ? 1 : -1;
    }
  }
  return predictions;
}

}  // namespace rmlal
