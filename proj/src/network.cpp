#include "percept/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <type_traits>
#include <utility>

#include "percept/error.hpp"

namespace percept {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void shape_error(const Layer& layer, const std::string& what) {
  throw Error(ErrorCode::kShapeMismatch, "layer '" + layer.name + "': " + what);
}

Shape infer_output_shape(const Layer& layer, const Shape& in) {
  return std::visit(
      Overloaded{
          [&](const Conv2d& c) -> Shape {
            if (in.size() != 3) shape_error(layer, "conv2d expects [C,H,W] input, got " + shape_to_string(in));
            if (c.in_channels != in[0]) shape_error(layer, "input has " + std::to_string(in[0]) + " channels, conv2d declares " + std::to_string(c.in_channels));
            if (c.kernel < 1 || c.stride < 1 || c.padding < 0 || c.out_channels < 1) shape_error(layer, "invalid conv2d hyper-parameters");
            if (c.weights.size() != static_cast<std::size_t>(c.out_channels) * c.in_channels * c.kernel * c.kernel)
              shape_error(layer, "conv2d weight count does not match [out,in,k,k]");
            if (c.bias.size() != static_cast<std::size_t>(c.out_channels)) shape_error(layer, "conv2d bias count does not match out_channels");
            const int h = (in[1] + 2 * c.padding - c.kernel) / c.stride + 1;
            const int w = (in[2] + 2 * c.padding - c.kernel) / c.stride + 1;
            if (in[1] + 2 * c.padding < c.kernel || in[2] + 2 * c.padding < c.kernel) shape_error(layer, "kernel larger than padded input");
            return {c.out_channels, h, w};
          },
          [&](const Relu&) -> Shape { return in; },
          [&](const MaxPool2d& p) -> Shape {
            if (in.size() != 3) shape_error(layer, "maxpool2d expects [C,H,W] input");
            if (p.kernel < 1 || p.stride < 1 || p.kernel > in[1] || p.kernel > in[2]) shape_error(layer, "invalid maxpool2d window");
            return {in[0], (in[1] - p.kernel) / p.stride + 1, (in[2] - p.kernel) / p.stride + 1};
          },
          [&](const Flatten&) -> Shape { return {static_cast<int>(shape_numel(in))}; },
          [&](const Dense& d) -> Shape {
            if (in.size() != 1) shape_error(layer, "dense expects a flat input, got " + shape_to_string(in));
            if (in[0] != d.in_features) shape_error(layer, "input has " + std::to_string(in[0]) + " features, dense declares " + std::to_string(d.in_features));
            if (d.out_features < 1) shape_error(layer, "dense needs at least one output");
            if (d.weights.size() != static_cast<std::size_t>(d.in_features) * d.out_features) shape_error(layer, "dense weight count does not match [out,in]");
            if (d.bias.size() != static_cast<std::size_t>(d.out_features)) shape_error(layer, "dense bias count does not match out_features");
            return {d.out_features};
          },
          [&](const Softmax&) -> Shape {
            if (in.size() != 1) shape_error(layer, "softmax expects a flat input");
            return in;
          },
      },
      layer.params);
}

// Kernels shared by the float engine and the double-precision checker.

template <class T>
void conv_forward(const Conv2d& c, const Shape& in_shape, const Shape& out_shape,
                  std::span<const T> in, std::span<T> out) {
  const int ih = in_shape[1], iw = in_shape[2];
  const int oh = out_shape[1], ow = out_shape[2];
  for (int o = 0; o < c.out_channels; ++o) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        T acc = static_cast<T>(c.bias[o]);
        for (int i = 0; i < c.in_channels; ++i) {
          for (int ky = 0; ky < c.kernel; ++ky) {
            const int y = oy * c.stride - c.padding + ky;
            if (y < 0 || y >= ih) continue;
            for (int kx = 0; kx < c.kernel; ++kx) {
              const int x = ox * c.stride - c.padding + kx;
              if (x < 0 || x >= iw) continue;
              acc += static_cast<T>(c.weight(o, i, ky, kx)) *
                     in[(static_cast<std::size_t>(i) * ih + y) * iw + x];
            }
          }
        }
        out[(static_cast<std::size_t>(o) * oh + oy) * ow + ox] = acc;
      }
    }
  }
}

template <class T>
void conv_backward(const Conv2d& c, const Shape& in_shape, const Shape& out_shape,
                   std::span<const T> grad_out, std::span<T> grad_in) {
  const int ih = in_shape[1], iw = in_shape[2];
  const int oh = out_shape[1], ow = out_shape[2];
  std::fill(grad_in.begin(), grad_in.end(), T{0});
  for (int o = 0; o < c.out_channels; ++o) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const T g = grad_out[(static_cast<std::size_t>(o) * oh + oy) * ow + ox];
        if (g == T{0}) continue;
        for (int i = 0; i < c.in_channels; ++i) {
          for (int ky = 0; ky < c.kernel; ++ky) {
            const int y = oy * c.stride - c.padding + ky;
            if (y < 0 || y >= ih) continue;
            for (int kx = 0; kx < c.kernel; ++kx) {
              const int x = ox * c.stride - c.padding + kx;
              if (x < 0 || x >= iw) continue;
              grad_in[(static_cast<std::size_t>(i) * ih + y) * iw + x] +=
                  static_cast<T>(c.weight(o, i, ky, kx)) * g;
            }
          }
        }
      }
    }
  }
}

// Index (within the input plane) of the first maximal element of each window.
template <class T>
std::size_t pool_argmax(const MaxPool2d& p, const Shape& in_shape, std::span<const T> in,
                        int ch, int oy, int ox) {
  const int ih = in_shape[1], iw = in_shape[2];
  std::size_t best = 0;
  T best_value{};
  bool first = true;
  for (int ky = 0; ky < p.kernel; ++ky) {
    for (int kx = 0; kx < p.kernel; ++kx) {
      const int y = oy * p.stride + ky;
      const int x = ox * p.stride + kx;
      const std::size_t idx = (static_cast<std::size_t>(ch) * ih + y) * iw + x;
      if (first || in[idx] > best_value) {
        best = idx;
        best_value = in[idx];
        first = false;
      }
    }
  }
  return best;
}

template <class T>
void pool_forward(const MaxPool2d& p, const Shape& in_shape, const Shape& out_shape,
                  std::span<const T> in, std::span<T> out,
                  std::vector<std::int32_t>* pattern) {
  const int oh = out_shape[1], ow = out_shape[2];
  for (int ch = 0; ch < out_shape[0]; ++ch) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const std::size_t arg = pool_argmax(p, in_shape, in, ch, oy, ox);
        out[(static_cast<std::size_t>(ch) * oh + oy) * ow + ox] = in[arg];
        if (pattern) pattern->push_back(static_cast<std::int32_t>(arg));
      }
    }
  }
}

template <class T>
void dense_forward(const Dense& d, std::span<const T> in, std::span<T> out) {
  for (int o = 0; o < d.out_features; ++o) {
    T acc = static_cast<T>(d.bias[o]);
    for (int i = 0; i < d.in_features; ++i) {
      acc += static_cast<T>(d.weight(o, i)) * in[i];
    }
    out[o] = acc;
  }
}

template <class T>
void softmax_inplace(std::span<T> v) {
  const T mx = *std::max_element(v.begin(), v.end());
  T sum{0};
  for (auto& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (auto& x : v) x /= sum;
}

template <class T>
std::vector<T> layer_forward(const Layer& layer, const Shape& in_shape, const Shape& out_shape,
                             std::span<const T> in, std::vector<std::int32_t>* pattern) {
  std::vector<T> out(shape_numel(out_shape));
  std::visit(Overloaded{
                 [&](const Conv2d& c) { conv_forward<T>(c, in_shape, out_shape, in, out); },
                 [&](const Relu&) {
                   for (std::size_t i = 0; i < in.size(); ++i) {
                     out[i] = in[i] > T{0} ? in[i] : T{0};
                     if (pattern) pattern->push_back(in[i] > T{0} ? 1 : 0);
                   }
                 },
                 [&](const MaxPool2d& p) { pool_forward<T>(p, in_shape, out_shape, in, out, pattern); },
                 [&](const Flatten&) { std::copy(in.begin(), in.end(), out.begin()); },
                 [&](const Dense& d) { dense_forward<T>(d, in, out); },
                 [&](const Softmax&) {
                   std::copy(in.begin(), in.end(), out.begin());
                   softmax_inplace<T>(out);
                 },
             },
             layer.params);
  return out;
}

std::string names_list(const Network& net) {
  std::string out;
  for (const auto& name : net.layer_names()) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

}  // namespace

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool2d: return "maxpool2d";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kDense: return "dense";
    case LayerKind::kSoftmax: return "softmax";
  }
  return "unknown";
}

LayerKind Layer::kind() const {
  return std::visit(Overloaded{
                        [](const Conv2d&) { return LayerKind::kConv2d; },
                        [](const Relu&) { return LayerKind::kRelu; },
                        [](const MaxPool2d&) { return LayerKind::kMaxPool2d; },
                        [](const Flatten&) { return LayerKind::kFlatten; },
                        [](const Dense&) { return LayerKind::kDense; },
                        [](const Softmax&) { return LayerKind::kSoftmax; },
                    },
                    params);
}

Layer make_conv2d(std::string name, int in_channels, int out_channels, int kernel,
                  int stride, int padding) {
  Conv2d c;
  c.in_channels = in_channels;
  c.out_channels = out_channels;
  c.kernel = kernel;
  c.stride = stride;
  c.padding = padding;
  c.weights.assign(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel, 0.0f);
  c.bias.assign(static_cast<std::size_t>(out_channels), 0.0f);
  return {std::move(name), std::move(c)};
}

Layer make_dense(std::string name, int in_features, int out_features) {
  Dense d;
  d.in_features = in_features;
  d.out_features = out_features;
  d.weights.assign(static_cast<std::size_t>(in_features) * out_features, 0.0f);
  d.bias.assign(static_cast<std::size_t>(out_features), 0.0f);
  return {std::move(name), std::move(d)};
}

Layer make_relu(std::string name) { return {std::move(name), Relu{}}; }
Layer make_maxpool2d(std::string name, int kernel, int stride) {
  return {std::move(name), MaxPool2d{kernel, stride}};
}
Layer make_flatten(std::string name) { return {std::move(name), Flatten{}}; }
Layer make_softmax(std::string name) { return {std::move(name), Softmax{}}; }

Network::Network(Shape input_shape, std::vector<Layer> layers)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  if (input_shape_.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "network input shape is empty");
  }
  shape_numel(input_shape_);
  if (layers_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "network has no layers");
  }
  std::set<std::string> seen;
  Shape shape = input_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    if (layer.name.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "layer " + std::to_string(i) + " has no name");
    }
    if (!seen.insert(layer.name).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate layer name '" + layer.name + "'");
    }
    for (const float w : std::visit(Overloaded{
                                        [](const Conv2d& c) { return c.weights; },
                                        [](const Dense& d) { return d.weights; },
                                        [](const auto&) { return std::vector<float>{}; },
                                    },
                                    layer.params)) {
      if (!std::isfinite(w)) {
        throw Error(ErrorCode::kNumericalError, "layer '" + layer.name + "' has non-finite weights");
      }
    }
    if (layer.kind() == LayerKind::kSoftmax && i + 1 != layers_.size()) {
      throw Error(ErrorCode::kInvalidArgument, "softmax is only supported as the last layer");
    }
    shape = infer_output_shape(layer, shape);
    output_shapes_.push_back(shape);
  }
  logit_layer_ = layers_.back().kind() == LayerKind::kSoftmax ? layers_.size() - 2 : layers_.size() - 1;
  if (layers_.size() == 1 && layers_.back().kind() == LayerKind::kSoftmax) {
    throw Error(ErrorCode::kInvalidArgument, "network consists only of a softmax");
  }
  class_count_ = static_cast<int>(shape_numel(output_shapes_[logit_layer_]));
}

std::size_t Network::layer_index(std::string_view name) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].name == name) return i;
  }
  throw Error(ErrorCode::kUnknownLayerName,
              "no layer named '" + std::string(name) + "'; available: " + names_list(*this));
}

bool Network::has_layer(std::string_view name) const {
  return std::any_of(layers_.begin(), layers_.end(),
                     [&](const Layer& l) { return l.name == name; });
}

std::vector<std::string> Network::layer_names() const {
  std::vector<std::string> names;
  names.reserve(layers_.size());
  for (const auto& l : layers_) names.push_back(l.name);
  return names;
}

ForwardPass::ForwardPass(const Network& net, Tensor input) : net_(&net), input_(std::move(input)) {
  if (input_.shape() != net.input_shape()) {
    throw Error(ErrorCode::kShapeMismatch, "input shape " + shape_to_string(input_.shape()) +
                                               " does not match network input " +
                                               shape_to_string(net.input_shape()));
  }
  outputs_.reserve(net.layer_count());
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    const Tensor& in = layer_input(i);
    auto out = layer_forward<float>(net.layers()[i], net.layer_input_shape(i),
                                    net.output_shape(i), in.data(), nullptr);
    check_finite(out, ("forward output of layer '" + net.layers()[i].name + "'").c_str());
    outputs_.emplace_back(net.output_shape(i), std::move(out));
  }
  const Tensor& raw = outputs_[net.logit_layer()];
  logits_ = raw.reshaped({static_cast<int>(raw.size())});
  probs_ = softmax(logits_);
}

Tensor softmax(const Tensor& logits) {
  std::vector<float> v(logits.data().begin(), logits.data().end());
  softmax_inplace<float>(v);
  const int n = static_cast<int>(v.size());
  return Tensor({n}, std::move(v));
}

ForwardResult forward(const Network& net, const Tensor& input, const std::set<std::string>& record) {
  for (const auto& name : record) net.layer_index(name);
  ForwardPass pass(net, input);
  ForwardResult result{pass.logits(), pass.probs(), {}};
  for (const auto& name : record) {
    result.tape.activations.emplace(name, pass.output(net.layer_index(name)));
  }
  return result;
}

Tensor score_seed(const ForwardPass& pass, int target, ScoreKind score) {
  const int k = pass.network().class_count();
  if (target < 0 || target >= k) {
    throw Error(ErrorCode::kInvalidTarget, "target class " + std::to_string(target) +
                                               " outside [0, " + std::to_string(k) + ")");
  }
  Tensor seed({k});
  if (score == ScoreKind::kLogit) {
    seed[static_cast<std::size_t>(target)] = 1.0f;
  } else {
    const auto& p = pass.probs();
    const float pc = p[static_cast<std::size_t>(target)];
    for (int j = 0; j < k; ++j) {
      seed[static_cast<std::size_t>(j)] = pc * ((j == target ? 1.0f : 0.0f) - p[static_cast<std::size_t>(j)]);
    }
  }
  return seed;
}

BackwardResult backpropagate(const ForwardPass& pass, std::size_t from_layer, const Tensor& seed,
                             PropagationRule rule, const std::set<std::string>& record) {
  const Network& net = pass.network();
  if (from_layer >= net.layer_count()) {
    throw Error(ErrorCode::kInvalidArgument, "backward start layer out of range");
  }
  if (seed.size() != shape_numel(net.output_shape(from_layer))) {
    throw Error(ErrorCode::kShapeMismatch, "seed gradient does not match layer '" +
                                               net.layers()[from_layer].name + "' output");
  }
  BackwardResult result;
  for (const auto& name : record) {
    const std::size_t idx = net.layer_index(name);
    result.tape.activations.emplace(name, pass.output(idx));
    if (idx > from_layer) result.tape.gradients.emplace(name, Tensor(net.output_shape(idx)));
  }

  std::vector<float> grad(seed.data().begin(), seed.data().end());
  for (std::size_t step = from_layer + 1; step-- > 0;) {
    const Layer& layer = net.layers()[step];
    if (record.count(layer.name)) {
      result.tape.gradients.insert_or_assign(layer.name, Tensor(net.output_shape(step), grad));
    }
    const Shape& in_shape = net.layer_input_shape(step);
    const Shape& out_shape = net.output_shape(step);
    const Tensor& in = pass.layer_input(step);
    std::vector<float> grad_in(shape_numel(in_shape), 0.0f);
    std::visit(
        Overloaded{
            [&](const Conv2d& c) {
              conv_backward<float>(c, in_shape, out_shape, grad, grad_in);
            },
            [&](const Relu&) {
              for (std::size_t i = 0; i < grad.size(); ++i) {
                const bool open = in[i] > 0.0f &&
                                  (rule == PropagationRule::kStandard || grad[i] > 0.0f);
                grad_in[i] = open ? grad[i] : 0.0f;
              }
            },
            [&](const MaxPool2d& p) {
              const int oh = out_shape[1], ow = out_shape[2];
              for (int ch = 0; ch < out_shape[0]; ++ch) {
                for (int oy = 0; oy < oh; ++oy) {
                  for (int ox = 0; ox < ow; ++ox) {
                    const std::size_t arg = pool_argmax<float>(p, in_shape, in.data(), ch, oy, ox);
                    grad_in[arg] += grad[(static_cast<std::size_t>(ch) * oh + oy) * ow + ox];
                  }
                }
              }
            },
            [&](const Flatten&) { grad_in = grad; },
            [&](const Dense& d) {
              for (int o = 0; o < d.out_features; ++o) {
                const float g = grad[static_cast<std::size_t>(o)];
                if (g == 0.0f) continue;
                for (int i = 0; i < d.in_features; ++i) {
                  grad_in[static_cast<std::size_t>(i)] += d.weight(o, i) * g;
                }
              }
            },
            [&](const Softmax&) {
              const Tensor& out = pass.output(step);
              float dot = 0.0f;
              for (std::size_t i = 0; i < grad.size(); ++i) dot += grad[i] * out[i];
              for (std::size_t i = 0; i < grad.size(); ++i) grad_in[i] = out[i] * (grad[i] - dot);
            },
        },
        layer.params);
    check_finite(grad_in, ("backward through layer '" + layer.name + "'").c_str());
    grad = std::move(grad_in);
  }
  result.input_gradient = Tensor(net.input_shape(), std::move(grad));
  return result;
}

Tensor backward(const Network& net, const Tensor& input, int target, const GradientWrt& wrt,
                PropagationRule rule, ScoreKind score) {
  std::set<std::string> record;
  if (!wrt.is_input()) {
    net.layer_index(wrt.layer);
    record.insert(wrt.layer);
  }
  ForwardPass pass(net, input);
  const Tensor seed = score_seed(pass, target, score);
  auto result = backpropagate(pass, net.logit_layer(),
                              seed.reshaped(net.output_shape(net.logit_layer())), rule, record);
  if (wrt.is_input()) return std::move(result.input_gradient);
  return std::move(result.tape.gradients.at(wrt.layer));
}

std::vector<double> forward_logits_f64(const Network& net, std::span<const double> input,
                                       std::vector<std::int32_t>* pattern) {
  if (input.size() != shape_numel(net.input_shape())) {
    throw Error(ErrorCode::kShapeMismatch, "input size does not match network input");
  }
  std::vector<double> current(input.begin(), input.end());
  for (std::size_t i = 0; i <= net.logit_layer(); ++i) {
    current = layer_forward<double>(net.layers()[i], net.layer_input_shape(i), net.output_shape(i),
                                    current, pattern);
  }
  return current;
}

GradientCheckReport gradient_check_report(const Network& net, const Tensor& input, int target,
                                          double epsilon, const GradientCheckOptions& options) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gradient check epsilon must be positive");
  }
  const Tensor analytic = backward(net, input, target, GradientWrt::input(),
                                   PropagationRule::kStandard, options.score);

  std::vector<double> x(input.data().begin(), input.data().end());
  auto score_at = [&](std::vector<std::int32_t>& pattern) {
    pattern.clear();
    std::vector<double> logits = forward_logits_f64(net, x, &pattern);
    if (options.score == ScoreKind::kProb) softmax_inplace<double>(logits);
    return logits[static_cast<std::size_t>(target)];
  };
  std::vector<std::int32_t> base_pattern, plus_pattern, minus_pattern;
  score_at(base_pattern);

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(options.seed);
  std::shuffle(order.begin(), order.end(), rng);

  GradientCheckReport report;
  for (std::size_t idx : order) {
    if (report.checked >= options.samples) break;
    const double original = x[idx];
    x[idx] = original + epsilon;
    const double f_plus = score_at(plus_pattern);
    x[idx] = original - epsilon;
    const double f_minus = score_at(minus_pattern);
    x[idx] = original;
    // Softmax is smooth; only piecewise-linear layers can introduce kinks.
    if (plus_pattern != base_pattern || minus_pattern != base_pattern) {
      ++report.skipped_kinks;
      continue;
    }
    const double numeric = (f_plus - f_minus) / (2.0 * epsilon);
    const double a = analytic[idx];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    report.max_rel_error = std::max(report.max_rel_error, std::abs(a - numeric) / denom);
    ++report.checked;
  }
  return report;
}

double gradient_check(const Network& net, const Tensor& input, int target, double epsilon,
                      const GradientCheckOptions& options) {
  return gradient_check_report(net, input, target, epsilon, options).max_rel_error;
}

}  // namespace percept
