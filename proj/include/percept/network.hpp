#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "percept/tensor.hpp"

namespace percept {

enum class LayerKind : std::uint8_t {
  kConv2d = 1,
  kRelu = 2,
  kMaxPool2d = 3,
  kFlatten = 4,
  kDense = 5,
  kSoftmax = 6,
};

std::string_view layer_kind_name(LayerKind kind);

// Square-kernel 2-D convolution with zero padding.
// weights are laid out [out_channels][in_channels][kernel][kernel].
struct Conv2d {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  float& weight(int o, int i, int ky, int kx) {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx];
  }
  float weight(int o, int i, int ky, int kx) const {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx];
  }
};

struct Relu {};

struct MaxPool2d {
  int kernel = 2;
  int stride = 2;
};

struct Flatten {};

// weights are laid out [out_features][in_features].
struct Dense {
  int in_features = 0;
  int out_features = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  float& weight(int o, int i) {
    return weights[static_cast<std::size_t>(o) * in_features + i];
  }
  float weight(int o, int i) const {
    return weights[static_cast<std::size_t>(o) * in_features + i];
  }
};

struct Softmax {};

using LayerParams = std::variant<Conv2d, Relu, MaxPool2d, Flatten, Dense, Softmax>;

struct Layer {
  std::string name;
  LayerParams params;

  LayerKind kind() const;
};

Layer make_conv2d(std::string name, int in_channels, int out_channels, int kernel,
                  int stride = 1, int padding = 0);
Layer make_dense(std::string name, int in_features, int out_features);
Layer make_relu(std::string name);
Layer make_maxpool2d(std::string name, int kernel, int stride);
Layer make_flatten(std::string name);
Layer make_softmax(std::string name);

// How ReLU layers route gradients backwards. Guided only passes gradient where
// both the forward input and the incoming gradient are positive.
enum class PropagationRule { kStandard, kGuided };

// Which class score a backward pass differentiates.
enum class ScoreKind { kLogit, kProb };

// Sequential network, immutable after construction. The logits are the
// flattened output of the last non-softmax layer; a trailing softmax layer is
// optional and only one is allowed.
class Network {
 public:
  Network(Shape input_shape, std::vector<Layer> layers);

  const Shape& input_shape() const noexcept { return input_shape_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  int class_count() const noexcept { return class_count_; }

  // Output shape of layer `i`.
  const Shape& output_shape(std::size_t i) const { return output_shapes_.at(i); }
  // Input shape of layer `i` (the network input for i == 0).
  const Shape& layer_input_shape(std::size_t i) const {
    return i == 0 ? input_shape_ : output_shapes_.at(i - 1);
  }

  // Index of the layer called `name`; UnknownLayerName lists what exists.
  std::size_t layer_index(std::string_view name) const;
  bool has_layer(std::string_view name) const;
  std::vector<std::string> layer_names() const;

  // Index of the layer whose output holds the logits.
  std::size_t logit_layer() const noexcept { return logit_layer_; }

 private:
  Shape input_shape_;
  std::vector<Layer> layers_;
  std::vector<Shape> output_shapes_;
  std::size_t logit_layer_ = 0;
  int class_count_ = 0;
};

// Activations and gradients captured at named layers. Activations are layer
// outputs; gradients are d(score)/d(layer output).
struct Tape {
  std::map<std::string, Tensor> activations;
  std::map<std::string, Tensor> gradients;
};

// Every intermediate output of one forward evaluation. Gradient computations
// reuse it instead of re-running the network.
class ForwardPass {
 public:
  ForwardPass(const Network& net, Tensor input);

  const Network& network() const noexcept { return *net_; }
  const Tensor& input() const noexcept { return input_; }
  const Tensor& output(std::size_t layer) const { return outputs_.at(layer); }
  // Input of layer `i`.
  const Tensor& layer_input(std::size_t i) const {
    return i == 0 ? input_ : outputs_.at(i - 1);
  }
  const Tensor& logits() const noexcept { return logits_; }
  const Tensor& probs() const noexcept { return probs_; }

 private:
  const Network* net_;
  Tensor input_;
  std::vector<Tensor> outputs_;
  Tensor logits_;
  Tensor probs_;
};

struct ForwardResult {
  Tensor logits;
  Tensor probs;
  Tape tape;
};

ForwardResult forward(const Network& net, const Tensor& input,
                      const std::set<std::string>& record = {});

// Numerically stable softmax over a flat vector.
Tensor softmax(const Tensor& logits);

// Gradient of the chosen class score with respect to the logits.
Tensor score_seed(const ForwardPass& pass, int target, ScoreKind score);

struct BackwardResult {
  Tensor input_gradient;
  // Activations and gradients for every recorded layer name.
  Tape tape;
};

// Propagates `seed` (a gradient with respect to the output of layer
// `from_layer`) back to the input. Recorded layers after `from_layer` receive
// zero gradients.
BackwardResult backpropagate(const ForwardPass& pass, std::size_t from_layer,
                             const Tensor& seed, PropagationRule rule,
                             const std::set<std::string>& record = {});

// What a backward pass differentiates with respect to: the network input or
// the output of a named layer.
struct GradientWrt {
  std::string layer;  // empty means the network input

  static GradientWrt input() { return {}; }
  static GradientWrt layer_output(std::string name) { return {std::move(name)}; }
  bool is_input() const noexcept { return layer.empty(); }
};

// d(score of `target`)/d(requested tensor).
Tensor backward(const Network& net, const Tensor& input, int target,
                const GradientWrt& wrt = GradientWrt::input(),
                PropagationRule rule = PropagationRule::kStandard,
                ScoreKind score = ScoreKind::kLogit);

struct GradientCheckOptions {
  std::size_t samples = 200;
  std::uint64_t seed = 0x5eedULL;
  ScoreKind score = ScoreKind::kLogit;
};

struct GradientCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Coordinates dropped because a ReLU sign or a max-pool winner changed
  // inside [x - eps, x + eps], where central differences are meaningless.
  std::size_t skipped_kinks = 0;
};

// Compares backward(to=input) with central differences evaluated in double
// precision on a seeded subsample of input coordinates.
GradientCheckReport gradient_check_report(const Network& net, const Tensor& input,
                                          int target, double epsilon,
                                          const GradientCheckOptions& options = {});

double gradient_check(const Network& net, const Tensor& input, int target,
                      double epsilon, const GradientCheckOptions& options = {});

// Double-precision logits, plus the activation pattern (ReLU signs and
// max-pool winners) if `pattern` is non-null.
std::vector<double> forward_logits_f64(const Network& net, std::span<const double> input,
                                       std::vector<std::int32_t>* pattern = nullptr);

}  // namespace percept
