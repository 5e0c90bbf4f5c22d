#include "percept/surrogate.hpp"

#include <cmath>

#include "percept/error.hpp"

namespace percept {

double weighted_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted, const Eigen::VectorXd& w) {
  const double wsum = w.sum();
  if (!(wsum > 0.0)) return 0.0;
  const double mean = w.dot(y) / wsum;
  const double total = (w.array() * (y.array() - mean).square()).sum();
  // relative threshold: constant targets pick up rounding noise in `total`
  if (total <= 1e-24 * std::max(1.0, wsum)) return 0.0;
  const double residual = (w.array() * (y - fitted).array().square()).sum();
  return 1.0 - residual / total;
}

RidgeFit weighted_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                        double lambda) {
  if (x.rows() != y.size() || y.size() != w.size() || x.rows() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "ridge design, target and weights disagree in length");
  }
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "ridge lambda must be >= 0");
  if ((w.array() < 0.0).any() || !(w.sum() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample weights must be nonnegative with positive sum");
  }
  const double wsum = w.sum();
  const Eigen::RowVectorXd x_mean = (w.transpose() * x) / wsum;
  const double y_mean = w.dot(y) / wsum;
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  const Eigen::VectorXd sw = w.array().sqrt();

  RidgeFit fit;
  if (x.cols() == 0) {
    fit.coefficients = Eigen::VectorXd(0);
  } else if (lambda > 0.0) {
    const Eigen::MatrixXd xw = sw.asDiagonal() * xc;
    Eigen::MatrixXd gram = xw.transpose() * xw;
    gram.diagonal().array() += lambda;
    fit.coefficients = gram.ldlt().solve(xw.transpose() * (sw.asDiagonal() * yc));
  } else {
    const Eigen::MatrixXd xw = sw.asDiagonal() * xc;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xw);
    fit.coefficients = cod.solve(sw.asDiagonal() * yc);
  }
  fit.intercept = y_mean - x_mean.dot(fit.coefficients);
  const Eigen::VectorXd fitted = (x * fit.coefficients).array() + fit.intercept;
  fit.r2 = weighted_r2(y, fitted, w);
  if (!fit.coefficients.allFinite() || !std::isfinite(fit.intercept)) {
    throw Error(ErrorCode::kSingularSystem, "ridge solve produced non-finite coefficients");
  }
  return fit;
}

}  // namespace percept
