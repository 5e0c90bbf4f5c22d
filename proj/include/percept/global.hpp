#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "percept/network.hpp"

namespace percept {

enum class TargetKind { kFilter, kLayer, kLogit, kInverted };

struct OptimizationTarget {
  TargetKind kind = TargetKind::kFilter;
  std::string layer;  // unused for kLogit
  int index = 0;      // filter index (kFilter) or class (kLogit)
};

// Step sizes per mode, tuned on the reference CNN.
inline constexpr double kDefaultAscentRate = 0.05;
inline constexpr double kDefaultInversionRate = 0.3;

struct OptimizationConfig {
  OptimizationTarget target;
  std::optional<Tensor> init;  // seeded noise around 0.5 when unset
  std::uint64_t seed = 0;
  int num_iter = 10;
  double learning_rate = kDefaultAscentRate;
  double l2_decay = 1e-4;    // ascent modes
  double tv_weight = 0.0;    // inversion
  double alpha_weight = 0.0; // inversion, weight of |x|^6
  int jitter = 2;            // ascent modes, max roll in pixels
};

// Pinned defaults for each mode; callers adjust fields afterwards.
OptimizationConfig default_ascent_config(OptimizationTarget target);
OptimizationConfig default_inversion_config(std::string layer);

struct OptimizationTrace {
  // Objective before each step: the raw activation for ascent modes, the full
  // regularized loss for inversion.
  std::vector<double> objectives;
  double final_objective = 0.0;
  Tensor image;
};

// Seeded noise image in [0,1] with the network's input shape.
Tensor noise_image(const Network& net, std::uint64_t seed);

// Activation objective J(x) of an ascent target.
double activation_objective(const Network& net, const Tensor& x, const OptimizationTarget& target);

OptimizationTrace maximize_activation(const Network& net, const OptimizationConfig& cfg);

// maximize_activation started from `image`.
OptimizationTrace deep_dream(const Network& net, const Tensor& image, const std::string& layer, int filter,
                             OptimizationConfig cfg);

// Descent on |phi(x) - phi(image)|^2 / |phi(image)|^2 + tv * TV(x) + alpha * |x|^6.
OptimizationTrace invert_features(const Network& net, const Tensor& image, const std::string& layer,
                                  OptimizationConfig cfg);

double inversion_objective(const Network& net, const Tensor& x, const Tensor& target_activation,
                           std::size_t layer, const OptimizationConfig& cfg);

// Isotropic total variation; forward differences, replicated border.
double total_variation(const Tensor& x);

}  // namespace percept
