#pragma once

#include <Eigen/Dense>

namespace percept {

struct RidgeFit {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  // Weighted R^2 against the weighted-mean null model; 0 when the target has
  // no weighted variance.
  double r2 = 0.0;
};

// Minimises sum_i w_i (y_i - b - x_i . beta)^2 + lambda |beta|^2 with an
// unpenalised intercept b. With lambda == 0 a rank-deficient design gets the
// minimum-norm solution.
RidgeFit weighted_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                        double lambda);

double weighted_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted, const Eigen::VectorXd& w);

}  // namespace percept
