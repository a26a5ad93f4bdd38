#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rmlal/errors.hpp"

namespace rmlal {

/// One-vs-rest evaluation classifier: L2-regularized logistic regression
/// trained by a deterministic damped Newton method.
struct RidgeLogistic {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  std::vector<double> loss_trace;  // penalized loss after every accepted step

  double decision(const Eigen::VectorXd& x) const {
    return weights.dot(x) + intercept;
  }
};

RidgeLogistic fit_ridge_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                                 double reg = 1.0);

/// Trains one classifier per label on the labeled block and predicts signs on
/// the test block. A label with a single class in the labeled set falls back
/// to a constant prediction of that class.
Eigen::MatrixXi train_eval_classifier(const Eigen::MatrixXd& X_labeled,
                                      const Eigen::MatrixXi& y_labeled,
                                      const Eigen::MatrixXd& X_test);

}  // namespace rmlal
