#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "percept/perturbation.hpp"

namespace percept {

inline constexpr int kMaxExactShapFeatures = 14;
inline constexpr int kMaxOracleFeatures = 10;

// Batched cooperative game: row i of `z` is a coalition (1 = player present),
// the result holds one value per row.
using CoalitionFunction = std::function<Eigen::VectorXd(const Eigen::MatrixXd& z)>;

struct ShapOptions {
  bool exact = false;
  // Interior coalitions to sample; ignored in exact mode. Falls back to full
  // enumeration when that needs fewer evaluations.
  int num_samples = 2048;
  std::uint64_t seed = 0;
  int top_k = 10;
};

struct ShapValues {
  double base_value = 0.0;  // v(empty)
  double full_value = 0.0;  // v(all players)
  Eigen::VectorXd phi;
  // Weighted R^2 of base + z.phi over the interior coalitions.
  double fit_quality = 0.0;
  int evaluations = 0;  // coalitions passed to the game, the empty one included
};

// Kernel SHAP: Shapley-kernel weighted least squares with the empty and full
// coalitions as equality constraints. Issues two calls to `v`: the empty
// coalition alone, then one batch headed by the full coalition.
ShapValues kernel_shap(const CoalitionFunction& v, int d, const ShapOptions& options);

// Shapley values by averaging marginal contributions over all d! orders.
// `v` receives coalitions as bitmasks (bit i = player i).
Eigen::VectorXd exact_shapley_oracle(const std::function<double(std::uint32_t)>& v, int d);

// Kernel SHAP on an instance's interpretable features; the game is the
// label probability with absent features replaced by the modality baseline.
Explanation kernel_shap_explain(const InterpretableInstance& instance, int label, const ShapOptions& options);

}  // namespace percept
