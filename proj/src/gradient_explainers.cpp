#include "percept/gradient_explainers.hpp"

#include <algorithm>
#include <cmath>

#include "percept/error.hpp"
#include "percept/parallel.hpp"
#include "percept/rng.hpp"

namespace percept {

namespace {

constexpr double kGradCamPPEpsilon = 1e-12;

int argmax(const Tensor& t) {
  return static_cast<int>(std::max_element(t.data().begin(), t.data().end()) - t.data().begin());
}

struct LayerCapture {
  Tensor activation;  // [K,h,w]
  Tensor gradient;    // same shape; empty when not requested
  int target_class = 0;
};

std::size_t spatial_layer(const Network& net, const std::string& name) {
  const std::size_t idx = net.layer_index(name);
  if (net.output_shape(idx).size() != 3) {
    throw Error(ErrorCode::kNonSpatialLayer,
                "layer '" + name + "' has output shape " + shape_to_string(net.output_shape(idx)) +
                    "; class activation maps need a [C,H,W] layer");
  }
  return idx;
}

LayerCapture capture(const Network& net, const Tensor& input, const CamRequest& req, bool with_gradient) {
  spatial_layer(net, req.target_layer);
  ForwardPass pass(net, input);
  LayerCapture out;
  out.target_class = req.target_class.value_or(argmax(pass.logits()));
  if (!with_gradient) {
    // still validates the class index
    score_seed(pass, out.target_class, req.score);
    out.activation = pass.output(net.layer_index(req.target_layer));
    return out;
  }
  const Tensor seed = score_seed(pass, out.target_class, req.score);
  auto back = backpropagate(pass, net.logit_layer(), seed.reshaped(net.output_shape(net.logit_layer())),
                            PropagationRule::kStandard, {req.target_layer});
  out.activation = std::move(back.tape.activations.at(req.target_layer));
  out.gradient = std::move(back.tape.gradients.at(req.target_layer));
  return out;
}

// ReLU(sum_k w_k A^k) at layer resolution, then upsampled to the input.
CamResult combine(const Network& net, const Tensor& activation, std::vector<double> weights, int target) {
  const int k = activation.dim(0), h = activation.dim(1), w = activation.dim(2);
  std::vector<float> layer(static_cast<std::size_t>(h) * w, 0.0f);
  for (std::size_t p = 0; p < layer.size(); ++p) {
    double s = 0.0;
    for (int ch = 0; ch < k; ++ch) s += weights[static_cast<std::size_t>(ch)] * activation[static_cast<std::size_t>(ch) * layer.size() + p];
    layer[p] = static_cast<float>(std::max(s, 0.0));
  }
  const Shape& in = net.input_shape();
  const int out_h = in.size() == 3 ? in[1] : h;
  const int out_w = in.size() == 3 ? in[2] : w;
  CamResult result;
  result.target_class = target;
  result.map = make_saliency(out_h, out_w, upsample_bilinear(layer, h, w, out_h, out_w), Signedness::kNonnegative);
  result.layer_map = make_saliency(h, w, std::move(layer), Signedness::kNonnegative);
  result.channel_weights = std::move(weights);
  return result;
}

}  // namespace

int predicted_class(const Network& net, const Tensor& input) {
  return argmax(ForwardPass(net, input).logits());
}

CamResult grad_cam(const Network& net, const Tensor& input, const CamRequest& req) {
  const LayerCapture cap = capture(net, input, req, true);
  const int k = cap.activation.dim(0);
  const std::size_t plane = static_cast<std::size_t>(cap.activation.dim(1)) * cap.activation.dim(2);
  std::vector<double> alpha(static_cast<std::size_t>(k), 0.0);
  for (int ch = 0; ch < k; ++ch) {
    double s = 0.0;
    for (std::size_t p = 0; p < plane; ++p) s += cap.gradient[static_cast<std::size_t>(ch) * plane + p];
    alpha[static_cast<std::size_t>(ch)] = s / static_cast<double>(plane);
  }
  return combine(net, cap.activation, std::move(alpha), cap.target_class);
}

CamResult grad_cam_pp(const Network& net, const Tensor& input, const CamRequest& req) {
  const LayerCapture cap = capture(net, input, req, true);
  const int k = cap.activation.dim(0);
  const std::size_t plane = static_cast<std::size_t>(cap.activation.dim(1)) * cap.activation.dim(2);
  std::vector<double> alpha(static_cast<std::size_t>(k), 0.0);
  for (int ch = 0; ch < k; ++ch) {
    const std::size_t base = static_cast<std::size_t>(ch) * plane;
    double activation_sum = 0.0;
    for (std::size_t p = 0; p < plane; ++p) activation_sum += cap.activation[base + p];
    double a = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      const double g = cap.gradient[base + p];
      const double g2 = g * g;
      const double denom = 2.0 * g2 + activation_sum * g2 * g;
      if (std::abs(denom) < kGradCamPPEpsilon) continue;
      a += (g2 / denom) * std::max(g, 0.0);
    }
    alpha[static_cast<std::size_t>(ch)] = a;
  }
  return combine(net, cap.activation, std::move(alpha), cap.target_class);
}

CamResult score_cam(const Network& net, const Tensor& input, const CamRequest& req) {
  CamRequest prob_req = req;
  prob_req.score = ScoreKind::kProb;
  const LayerCapture cap = capture(net, input, prob_req, false);
  const Shape& in_shape = net.input_shape();
  if (in_shape.size() != 3) throw Error(ErrorCode::kNonSpatialLayer, "Score-CAM needs a [C,H,W] input");
  const int k = cap.activation.dim(0), h = cap.activation.dim(1), w = cap.activation.dim(2);
  const int in_c = in_shape[0], in_h = in_shape[1], in_w = in_shape[2];
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const std::size_t in_plane = static_cast<std::size_t>(in_h) * in_w;
  const auto cls = static_cast<std::size_t>(cap.target_class);

  const double baseline_prob = ForwardPass(net, Tensor(in_shape)).probs()[cls];
  std::vector<double> weights(static_cast<std::size_t>(k), 0.0);
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t ch) {
    const std::span<const float> channel = cap.activation.data().subspan(ch * plane, plane);
    const std::vector<float> norm = normalize_minmax(channel);
    if (std::all_of(norm.begin(), norm.end(), [](float v) { return v == 0.0f; })) {
      // masked input is the baseline itself
      return;
    }
    const std::vector<float> mask = upsample_bilinear(norm, h, w, in_h, in_w);
    Tensor masked = input;
    for (int c = 0; c < in_c; ++c) {
      for (std::size_t p = 0; p < in_plane; ++p) masked[static_cast<std::size_t>(c) * in_plane + p] *= mask[p];
    }
    weights[ch] = ForwardPass(net, masked).probs()[cls] - baseline_prob;
  });
  return combine(net, cap.activation, std::move(weights), cap.target_class);
}

CamResult class_activation_map(const Network& net, const Tensor& input, const CamRequest& req) {
  switch (req.method) {
    case CamMethod::kGradCam: return grad_cam(net, input, req);
    case CamMethod::kGradCamPlusPlus: return grad_cam_pp(net, input, req);
    case CamMethod::kScoreCam: return score_cam(net, input, req);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown CAM method");
}

namespace {

BackpropResult from_gradient(Tensor raw, int target) {
  BackpropResult r;
  r.map = collapse_abs_max(raw.rank() == 3 ? raw : raw.reshaped({1, 1, static_cast<int>(raw.size())}));
  r.raw = std::move(raw);
  r.target_class = target;
  return r;
}

}  // namespace

BackpropResult vanilla_bp(const Network& net, const Tensor& input, int target, ScoreKind score) {
  return from_gradient(backward(net, input, target, GradientWrt::input(), PropagationRule::kStandard, score),
                       target);
}

BackpropResult guided_bp(const Network& net, const Tensor& input, int target, ScoreKind score) {
  return from_gradient(backward(net, input, target, GradientWrt::input(), PropagationRule::kGuided, score),
                       target);
}

BackpropResult smooth_grad(const Network& net, const Tensor& input, int target,
                           const SmoothGradOptions& options, ScoreKind score) {
  if (options.samples < 1) throw Error(ErrorCode::kInvalidArgument, "SmoothGrad needs at least one sample");
  if (!(options.sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "SmoothGrad sigma must be >= 0");
  const auto [lo, hi] = std::minmax_element(input.data().begin(), input.data().end());
  const double noise_std = options.sigma * (static_cast<double>(*hi) - *lo);

  std::vector<Tensor> grads(static_cast<std::size_t>(options.samples));
  parallel_for(grads.size(), [&](std::size_t s) {
    Rng rng(derive_seed(options.seed, s));
    Tensor noisy = input;
    if (noise_std > 0.0) {
      for (auto& v : noisy.data()) v = static_cast<float>(v + noise_std * rng.normal());
    }
    grads[s] = backward(net, noisy, target, GradientWrt::input(), PropagationRule::kStandard, score);
  });
  std::vector<double> sum(input.size(), 0.0);
  for (const auto& g : grads) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += g[i];
  }
  std::vector<float> mean(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i) mean[i] = static_cast<float>(sum[i] / options.samples);
  return from_gradient(Tensor(input.shape(), std::move(mean)), target);
}

BackpropResult integrated_gradients(const Network& net, const Tensor& input, const Tensor& baseline,
                                    int steps, int target, ScoreKind score) {
  if (baseline.shape() != input.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "baseline shape " + shape_to_string(baseline.shape()) +
                                               " differs from input " + shape_to_string(input.shape()));
  }
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "integrated gradients needs at least one step");
  const std::size_t n = input.size();
  std::vector<double> delta(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = static_cast<double>(input[i]) - baseline[i];

  std::vector<Tensor> grads(static_cast<std::size_t>(steps));
  parallel_for(grads.size(), [&](std::size_t t) {
    const double alpha = (static_cast<double>(t) + 0.5) / steps;
    Tensor point = baseline;
    for (std::size_t i = 0; i < n; ++i) point[i] = static_cast<float>(baseline[i] + alpha * delta[i]);
    grads[t] = backward(net, point, target, GradientWrt::input(), PropagationRule::kStandard, score);
  });

  std::vector<double> avg(n, 0.0);
  std::vector<double> partial;
  partial.reserve(grads.size());
  double running = 0.0;
  for (const auto& g : grads) {
    for (std::size_t i = 0; i < n; ++i) {
      avg[i] += g[i];
      running += delta[i] * g[i] / steps;
    }
    partial.push_back(running);
  }
  std::vector<float> attr(n);
  for (std::size_t i = 0; i < n; ++i) attr[i] = static_cast<float>(delta[i] * (avg[i] / steps));
  BackpropResult r = from_gradient(Tensor(input.shape(), std::move(attr)), target);
  r.step_partial_sums = std::move(partial);
  return r;
}

}  // namespace percept
