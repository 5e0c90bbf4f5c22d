#include "percept/shap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "percept/error.hpp"
#include "percept/rng.hpp"
#include "percept/surrogate.hpp"

namespace percept {

namespace {

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// pi(z) for an interior coalition of size s.
double shapley_kernel(int d, int s) {
  return (d - 1.0) / (std::exp(log_binomial(d, s)) * s * (d - s));
}

struct Design {
  Eigen::MatrixXd z;  // interior coalitions
  Eigen::VectorXd w;
};

Design enumerate_interior(int d) {
  const std::uint32_t count = (1u << d) - 2u;
  Design out{Eigen::MatrixXd(count, d), Eigen::VectorXd(count)};
  for (std::uint32_t mask = 1, row = 0; row < count; ++mask, ++row) {
    int size = 0;
    for (int j = 0; j < d; ++j) {
      const bool on = (mask >> j) & 1u;
      out.z(row, j) = on ? 1.0 : 0.0;
      size += on;
    }
    out.w[row] = shapley_kernel(d, size);
  }
  return out;
}

// Sizes drawn in proportion to their total kernel mass, members uniformly;
// the sample then carries unit weights.
Design sample_interior(int d, int n, std::uint64_t seed) {
  std::vector<double> mass(static_cast<std::size_t>(d - 1));
  for (int s = 1; s < d; ++s) mass[static_cast<std::size_t>(s - 1)] = (d - 1.0) / (s * (d - s));
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  Design out{Eigen::MatrixXd::Zero(n, d), Eigen::VectorXd::Ones(n)};
  Rng rng(seed);
  std::vector<int> players(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform() * total;
    int size = d - 1;
    for (int s = 1; s < d; ++s) {
      u -= mass[static_cast<std::size_t>(s - 1)];
      if (u < 0.0) {
        size = s;
        break;
      }
    }
    std::iota(players.begin(), players.end(), 0);
    for (int k = 0; k < size; ++k) {
      const int pick = static_cast<int>(rng.uniform_int(k, d - 1));
      std::swap(players[static_cast<std::size_t>(k)], players[static_cast<std::size_t>(pick)]);
      out.z(i, players[static_cast<std::size_t>(k)]) = 1.0;
    }
  }
  return out;
}

}  // namespace

ShapValues kernel_shap(const CoalitionFunction& v, int d, const ShapOptions& options) {
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "Kernel SHAP needs at least one feature");
  if (options.exact && d > kMaxExactShapFeatures) {
    throw Error(ErrorCode::kTooManyFeaturesForExact, "exact Kernel SHAP enumerates 2^d coalitions; d = " +
                                                         std::to_string(d) + " exceeds " +
                                                         std::to_string(kMaxExactShapFeatures));
  }
  if (!options.exact && options.num_samples < 1) {
    throw Error(ErrorCode::kInvalidArgument, "Kernel SHAP needs at least one sampled coalition");
  }

  Design design;
  if (d >= 2) {
    const bool enumerate =
        options.exact || (d < 31 && (std::int64_t{1} << d) - 2 <= static_cast<std::int64_t>(options.num_samples));
    design = enumerate ? enumerate_interior(d) : sample_interior(d, options.num_samples, options.seed);
  } else {
    design = {Eigen::MatrixXd(0, d), Eigen::VectorXd(0)};
  }

  const Eigen::VectorXd empty_value = v(Eigen::MatrixXd::Zero(1, d));
  Eigen::MatrixXd batch(design.z.rows() + 1, d);
  batch.row(0).setOnes();
  batch.bottomRows(design.z.rows()) = design.z;
  const Eigen::VectorXd values = v(batch);
  if (empty_value.size() != 1 || values.size() != batch.rows()) {
    throw Error(ErrorCode::kPredictorFailure, "coalition function returned the wrong number of values");
  }

  ShapValues out;
  out.base_value = empty_value[0];
  out.full_value = values[0];
  out.evaluations = static_cast<int>(batch.rows()) + 1;
  const double delta = out.full_value - out.base_value;
  if (!std::isfinite(delta)) throw Error(ErrorCode::kSingularSystem, "coalition values are not finite");
  if (d == 1) {
    out.phi = Eigen::VectorXd::Constant(1, delta);
    return out;
  }

  // Substitute phi_d = delta - sum_{i<d} phi_i and solve for the rest.
  const Eigen::Index m = design.z.rows();
  const Eigen::VectorXd y = values.tail(m);
  const Eigen::VectorXd last = design.z.col(d - 1);
  const Eigen::MatrixXd x = design.z.leftCols(d - 1).colwise() - last;
  const Eigen::VectorXd target = (y.array() - out.base_value).matrix() - delta * last;
  const Eigen::VectorXd sw = design.w.array().sqrt();
  const Eigen::MatrixXd xw = sw.asDiagonal() * x;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xw.transpose() * xw);
  const Eigen::VectorXd head = cod.solve(xw.transpose() * (sw.asDiagonal() * target));
  if (!head.allFinite()) throw Error(ErrorCode::kSingularSystem, "Kernel SHAP system has no finite solution");

  out.phi.resize(d);
  out.phi.head(d - 1) = head;
  out.phi[d - 1] = delta - head.sum();
  const Eigen::VectorXd fitted = (design.z * out.phi).array() + out.base_value;
  out.fit_quality = weighted_r2(y, fitted, design.w);
  return out;
}

Eigen::VectorXd exact_shapley_oracle(const std::function<double(std::uint32_t)>& v, int d) {
  if (d < 1 || d > kMaxOracleFeatures) {
    throw Error(ErrorCode::kTooManyFeaturesForExact,
                "permutation oracle supports 1..." + std::to_string(kMaxOracleFeatures) + " players");
  }
  std::vector<double> cache(std::size_t{1} << d);
  for (std::uint32_t mask = 0; mask < cache.size(); ++mask) cache[mask] = v(mask);

  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  double orders = 0.0;
  do {
    std::uint32_t mask = 0;
    for (int player : order) {
      const std::uint32_t next = mask | (1u << player);
      sum[player] += cache[next] - cache[mask];
      mask = next;
    }
    orders += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  return sum / orders;
}

Explanation kernel_shap_explain(const InterpretableInstance& instance, int label, const ShapOptions& options) {
  if (label < 0 || label >= instance.num_classes()) {
    throw Error(ErrorCode::kInvalidTarget, "label " + std::to_string(label) + " outside the predictor's classes");
  }
  const CoalitionFunction game = [&](const Eigen::MatrixXd& z) -> Eigen::VectorXd {
    return instance.evaluate_coalitions(z).col(label);
  };
  const ShapValues values = kernel_shap(game, instance.dimension(), options);

  Explanation e;
  e.method = "shap";
  e.label = label;
  e.class_name = instance.class_names().at(static_cast<std::size_t>(label));
  e.intercept = values.base_value;
  e.fit_quality = values.fit_quality;
  e.n_samples = values.evaluations;
  e.seed = options.seed;
  e.label_probability = values.full_value;
  std::vector<FeatureWeight> weights;
  for (int i = 0; i < instance.dimension(); ++i) weights.push_back({i, instance.feature_name(i), values.phi[i]});
  e.weights = top_k_features(std::move(weights), options.top_k);
  return e;
}

}  // namespace percept
