#include <doctest.h>

#include <cmath>

#include "percept/gradient_explainers.hpp"
#include "percept/image_io.hpp"
#include "percept/models.hpp"
#include "percept/render.hpp"
#include "test_support.hpp"

using namespace percept;
using namespace percept::testing;

namespace {

// Layers after `layer`, as a network taking that layer's output.
Network tail_after(const Network& net, const std::string& layer) {
  const std::size_t idx = net.layer_index(layer);
  std::vector<Layer> rest(net.layers().begin() + static_cast<std::ptrdiff_t>(idx) + 1, net.layers().end());
  return Network(net.output_shape(idx), std::move(rest));
}

std::vector<double> softmax_of(const std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += p[i] = std::exp(z[i] - m);
  for (auto& v : p) v /= s;
  return p;
}

// d logit_target / d A by central differences through the oracle tail.
std::vector<double> oracle_layer_gradient(const Network& tail, const std::vector<double>& a, int target) {
  std::vector<double> g(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double eps = 1e-6;
    std::vector<double> up = a, dn = a;
    up[i] += eps;
    dn[i] -= eps;
    g[i] = (oracle_logits(tail, up)[static_cast<std::size_t>(target)] -
            oracle_logits(tail, dn)[static_cast<std::size_t>(target)]) / (2 * eps);
  }
  return g;
}

}  // namespace

TEST_CASE("Grad-CAM and Grad-CAM++ weights match an oracle recomputation") {
  const Network net = build_reference_cnn(7);
  const Tensor x = random_tensor(net.input_shape(), 21);
  // conv2 rather than relu2: relu2 zeros tie inside pooling windows, where
  // central differences average the two one-sided slopes.
  const std::string layer = "conv2";
  const Network tail = tail_after(net, layer);
  const Tensor a = ForwardPass(net, x).output(net.layer_index(layer));
  const std::vector<double> act = to_double(a);
  const int k = a.dim(0);
  const std::size_t plane = static_cast<std::size_t>(a.dim(1)) * a.dim(2);
  const std::vector<double> g = oracle_layer_gradient(tail, act, 2);

  const CamResult gc = grad_cam(net, x, {CamMethod::kGradCam, layer, 2});
  const CamResult pp = grad_cam_pp(net, x, {CamMethod::kGradCamPlusPlus, layer, 2});
  REQUIRE(gc.channel_weights.size() == static_cast<std::size_t>(k));
  for (int ch = 0; ch < k; ++ch) {
    double mean = 0.0, asum = 0.0, alpha = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      mean += g[ch * plane + p] / static_cast<double>(plane);
      asum += act[ch * plane + p];
    }
    for (std::size_t p = 0; p < plane; ++p) {
      const double gi = g[ch * plane + p], denom = 2 * gi * gi + asum * gi * gi * gi;
      if (std::abs(denom) >= 1e-12) alpha += gi * gi / denom * std::max(gi, 0.0);
    }
    CHECK(gc.channel_weights[static_cast<std::size_t>(ch)] == doctest::Approx(mean).epsilon(1e-4).scale(1e-5));
    CHECK(pp.channel_weights[static_cast<std::size_t>(ch)] == doctest::Approx(alpha).epsilon(1e-3).scale(1e-4));
  }
  // layer map = ReLU(sum_k w_k A^k)
  for (std::size_t p = 0; p < plane; ++p) {
    double s = 0.0;
    for (int ch = 0; ch < k; ++ch) s += gc.channel_weights[static_cast<std::size_t>(ch)] * act[ch * plane + p];
    CHECK(gc.layer_map.values[p] == doctest::Approx(std::max(s, 0.0)).epsilon(1e-4).scale(1e-5));
  }
  CHECK(gc.map.height == 16);
  CHECK(gc.map.width == 16);
}

TEST_CASE("Score-CAM weights are masked probability gains") {
  const Network net = build_quadrant_planted_cnn(7);
  const Tensor x = random_tensor(net.input_shape(), 22);
  const CamResult r = score_cam(net, x, {CamMethod::kScoreCam, "relu1", 1});
  const Tensor a = ForwardPass(net, x).output(net.layer_index("relu1"));
  const std::size_t plane = 256;
  const double base = softmax_of(oracle_logits(net, std::vector<double>(256, 0.0)))[1];
  for (int ch = 0; ch < a.dim(0); ++ch) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t p = 0; p < plane; ++p) {
      lo = std::min<double>(lo, a[ch * plane + p]);
      hi = std::max<double>(hi, a[ch * plane + p]);
    }
    double want = 0.0;
    if (hi > lo) {
      // relu1 is already at input resolution, so no upsampling is involved
      std::vector<double> masked = to_double(x);
      for (std::size_t p = 0; p < plane; ++p) masked[p] *= (a[ch * plane + p] - lo) / (hi - lo);
      want = softmax_of(oracle_logits(net, masked))[1] - base;
    }
    CHECK(r.channel_weights[static_cast<std::size_t>(ch)] == doctest::Approx(want).epsilon(1e-4).scale(1e-6));
  }
}

TEST_CASE("CAM maps are nonnegative and reject non-spatial layers") {
  const Network net = build_reference_cnn(7);
  const Tensor x = random_tensor(net.input_shape(), 23);
  for (const auto m : {CamMethod::kGradCam, CamMethod::kGradCamPlusPlus, CamMethod::kScoreCam}) {
    const CamResult r = class_activation_map(net, x, {m, "conv2", std::nullopt});
    CHECK(r.target_class == predicted_class(net, x));
    CHECK(r.map.signedness == Signedness::kNonnegative);
    for (float v : r.map.values) CHECK(v >= 0.0f);
    CHECK(code_of([&] { class_activation_map(net, x, {m, "fc1", 0}); }) == ErrorCode::kNonSpatialLayer);
    CHECK(code_of([&] { class_activation_map(net, x, {m, "nope", 0}); }) == ErrorCode::kUnknownLayerName);
    CHECK(code_of([&] { class_activation_map(net, x, {m, "conv2", 4}); }) == ErrorCode::kInvalidTarget);
  }
}

TEST_CASE("integrated gradients is exact on a linear network") {
  Layer fc = make_dense("fc", 16, 3);
  auto& d = std::get<Dense>(fc.params);
  Rng rng(4);
  for (auto& w : d.weights) w = static_cast<float>(rng.uniform(-1, 1));
  const Network lin({1, 4, 4}, {make_flatten("flat"), fc});
  const Tensor x = random_tensor({1, 4, 4}, 5);
  const Tensor b = random_tensor({1, 4, 4}, 6);
  const BackpropResult r = integrated_gradients(lin, x, b, 7, 2);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(r.raw[i] == doctest::Approx((double(x[i]) - b[i]) * d.weight(2, static_cast<int>(i))).epsilon(1e-5));
  }
  REQUIRE(r.step_partial_sums.size() == 7);
  double total = 0.0;
  for (float v : r.raw.data()) total += v;
  CHECK(r.step_partial_sums.back() == doctest::Approx(total).epsilon(1e-5));
  CHECK(code_of([&] { integrated_gradients(lin, x, Tensor({16}), 4, 0); }) == ErrorCode::kShapeMismatch);
  CHECK(code_of([&] { integrated_gradients(lin, x, b, 0, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("vanilla and SmoothGrad") {
  const Network net = build_reference_cnn(7);
  const Tensor x = random_tensor(net.input_shape(), 24);
  const BackpropResult v = vanilla_bp(net, x, 1);
  CHECK(v.raw == backward(net, x, 1));
  for (std::size_t i = 0; i < v.raw.size(); ++i) CHECK(v.map.values[i] == std::abs(v.raw[i]));
  const BackpropResult a = smooth_grad(net, x, 1, {8, 0.1, 3});
  const BackpropResult b = smooth_grad(net, x, 1, {8, 0.1, 3});
  const BackpropResult c = smooth_grad(net, x, 1, {8, 0.1, 4});
  CHECK(a.raw == b.raw);
  CHECK_FALSE(a.raw == c.raw);
  CHECK(code_of([&] { smooth_grad(net, x, 1, {0, 0.1, 0}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("saliency helpers") {
  const std::vector<float> src{0, 1, 2, 3};
  const std::vector<float> up = upsample_bilinear(src, 2, 2, 3, 3);
  CHECK(up == std::vector<float>{0, 0.5f, 1, 1, 1.5f, 2, 2, 2.5f, 3});
  CHECK(upsample_bilinear(std::vector<float>(4, 0.7f), 2, 2, 5, 7) == std::vector<float>(35, 0.7f));
  CHECK(normalize_minmax(std::vector<float>{2, 4, 3}) == std::vector<float>{0, 1, 0.5f});
  CHECK(normalize_minmax(std::vector<float>{5, 5}) == std::vector<float>{0, 0});
  const SaliencyMap m = collapse_abs_max(Tensor({2, 1, 2}, std::vector<float>{-3, 1, 2, -4}));
  CHECK(m.values == std::vector<float>{3, 4});
  CHECK(m.region_sum(0, 1, 1, 2) == 4.0);
  CHECK(m.total() == 7.0);
}

TEST_CASE("golden vanilla map of digit0") {
  const Network net = build_reference_cnn(7);
  const Tensor x = read_image(fixture("digit0.pgm"));
  const BackpropResult r = vanilla_bp(net, x, predicted_class(net, x));
  CHECK(matches_golden("vanilla_digit0.pgm", encode_pnm(grayscale(r.map))));
}

TEST_CASE("golden planted Grad-CAM overlay") {
  const Network net = build_quadrant_planted_cnn(7);
  const Tensor x = random_tensor(net.input_shape(), 400);
  const CamResult r = grad_cam(net, x, {CamMethod::kGradCam, "relu2", 0});
  CHECK(matches_golden("gradcam_quadrant0.ppm", encode_pnm(overlay(x, r.map, {Colormap::kJet, 0.5}))));
}

namespace {

// conv(1->1, 3x3, centre tap 1) -> relu -> flatten -> dense(16 -> 2) on a 4x4
// input, class rows +w and -w.
Network tiny_cam_net(float dense_weight) {
  Layer conv = make_conv2d("conv", 1, 1, 3, 1, 1);
  auto& c = std::get<Conv2d>(conv.params);
  std::fill(c.weights.begin(), c.weights.end(), 0.0f);
  c.weights[4] = 1.0f;
  Layer fc = make_dense("fc", 16, 2);
  auto& d = std::get<Dense>(fc.params);
  for (int i = 0; i < 16; ++i) {
    d.weight(0, i) = dense_weight;
    d.weight(1, i) = -dense_weight;
  }
  return Network({1, 4, 4}, {conv, make_relu("relu"), make_flatten("flat"), fc});
}

}  // namespace

TEST_CASE("CAM degenerate cases") {
  const Tensor x = random_tensor({1, 4, 4}, 70, 0.1, 1.0);
  // zero downstream weights: zero gradients, zero maps
  const Network dead = tiny_cam_net(0.0f);
  for (const auto m : {CamMethod::kGradCam, CamMethod::kGradCamPlusPlus, CamMethod::kScoreCam}) {
    const CamResult r = class_activation_map(dead, x, {m, "relu", 0});
    CHECK(r.map.total() == 0.0);
  }
  // single channel, constant positive gradient: map follows the activation
  const Network live = tiny_cam_net(0.5f);
  const CamResult gc = grad_cam(live, x, {CamMethod::kGradCam, "relu", 0});
  const CamResult pp = grad_cam_pp(live, x, {CamMethod::kGradCamPlusPlus, "relu", 0});
  const auto argmax = [](const std::vector<float>& v) { return std::max_element(v.begin(), v.end()) - v.begin(); };
  CHECK(argmax(gc.map.values) == argmax(x.values()));
  const std::vector<float> a = normalize_minmax(gc.map.values), b = normalize_minmax(pp.map.values);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
  // a constant channel normalizes to zero, so Score-CAM gives no weight
  const CamResult sc = score_cam(live, Tensor({1, 4, 4}, 0.5f), {CamMethod::kScoreCam, "relu", 0});
  CHECK(sc.map.total() == 0.0);
}

TEST_CASE("backprop family on linear and ReLU-free models") {
  Layer fc = make_dense("fc", 16, 2);
  auto& d = std::get<Dense>(fc.params);
  Rng rng(71);
  for (auto& w : d.weights) w = static_cast<float>(rng.uniform(-1, 1));
  const Network lin({1, 4, 4}, {make_flatten("flat"), fc});
  const Tensor x = random_tensor({1, 4, 4}, 72);
  const BackpropResult v = vanilla_bp(lin, x, 1);
  for (int i = 0; i < 16; ++i) CHECK(v.map.values[static_cast<std::size_t>(i)] == std::abs(d.weight(1, i)));
  CHECK(guided_bp(lin, x, 1).raw == v.raw);
  const BackpropResult s0 = smooth_grad(lin, x, 1, {7, 0.0, 1});
  for (std::size_t i = 0; i < 16; ++i) CHECK(s0.raw[i] == doctest::Approx(v.raw[i]).epsilon(1e-6));
  const BackpropResult noisy = smooth_grad(lin, x, 1, {500, 0.3, 2});
  for (std::size_t i = 0; i < 16; ++i) CHECK(noisy.raw[i] == doctest::Approx(v.raw[i]).epsilon(1e-5));
  const BackpropResult same = integrated_gradients(lin, x, x, 16, 1);
  CHECK(same.raw == Tensor({1, 4, 4}));

  // every pre-ReLU value negative: guided map is zero
  const Network dead = tiny_cam_net(1.0f);
  CHECK(guided_bp(dead, Tensor({1, 4, 4}, -0.5f), 0).map.total() == 0.0);
}
