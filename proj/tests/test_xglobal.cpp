#include <doctest.h>

#include <cmath>

#include "percept/global.hpp"
#include "percept/image_io.hpp"
#include "percept/models.hpp"
#include "test_support.hpp"

using namespace percept;
using namespace percept::testing;

namespace {

Network identity_net() {
  Layer conv = make_conv2d("id", 1, 1, 1);
  std::get<Conv2d>(conv.params).weights = {1.0f};
  Layer fc = make_dense("fc", 16, 2);
  return Network({1, 4, 4}, {conv, make_flatten("flat"), fc});
}

// Gradient implied by one plain descent/ascent step of size lr.
std::vector<double> implied_gradient(const Tensor& before, const Tensor& after, double lr) {
  std::vector<double> g(before.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (static_cast<double>(after[i]) - before[i]) / lr;
  return g;
}

}  // namespace

TEST_CASE("total variation by hand") {
  const Tensor x({1, 2, 2}, std::vector<float>{0, 1, 1, 1});
  CHECK(total_variation(x) == doctest::Approx(std::sqrt(2.0 + 1e-8) + 3.0 * std::sqrt(1e-8)));
  CHECK(total_variation(Tensor({1, 3, 3}, 0.4f)) == doctest::Approx(9.0 * std::sqrt(1e-8)));
}

TEST_CASE("noise image") {
  const Network net = build_reference_cnn(7);
  const Tensor a = noise_image(net, 1);
  CHECK(a == noise_image(net, 1));
  CHECK_FALSE(a == noise_image(net, 2));
  double mean = 0.0;
  for (float v : a.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
    mean += v;
  }
  CHECK(mean / a.size() == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("ascent step follows the activation gradient") {
  const Network net = build_reference_cnn(7);
  const Tensor x0 = random_tensor(net.input_shape(), 41, 0.3, 0.7);
  for (const OptimizationTarget target : {OptimizationTarget{TargetKind::kFilter, "conv2", 5},
                                          OptimizationTarget{TargetKind::kLayer, "relu1", 0},
                                          OptimizationTarget{TargetKind::kLogit, "", 2}}) {
    OptimizationConfig cfg = default_ascent_config(target);
    cfg.init = x0;
    cfg.num_iter = 1;
    cfg.jitter = 0;
    cfg.l2_decay = 0.0;
    cfg.learning_rate = 0.1;
    const OptimizationTrace t = maximize_activation(net, cfg);
    const std::vector<double> g = implied_gradient(x0, t.image, cfg.learning_rate);
    const std::size_t layer = target.kind == TargetKind::kLogit ? net.logit_layer() : net.layer_index(target.layer);
    const auto objective = [&](const std::vector<double>& x) {
      const std::vector<double> out = oracle_output(net, x, layer);
      if (target.kind == TargetKind::kLogit) return out[static_cast<std::size_t>(target.index)];
      const std::size_t plane = target.kind == TargetKind::kFilter ? out.size() / static_cast<std::size_t>(net.output_shape(layer)[0]) : out.size();
      const std::size_t begin = target.kind == TargetKind::kFilter ? static_cast<std::size_t>(target.index) * plane : 0;
      double s = 0.0;
      for (std::size_t p = 0; p < plane; ++p) s += out[begin + p];
      return s / static_cast<double>(plane);
    };
    for (std::size_t i = 0; i < g.size(); i += 29) {
      const double eps = 1e-6;
      std::vector<double> up = to_double(x0), dn = up;
      up[i] += eps;
      dn[i] -= eps;
      const double fd = (objective(up) - objective(dn)) / (2 * eps);
      // the step itself is float32, so allow its rounding
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-3).scale(1e-3));
    }
    CHECK(t.objectives.size() == 1);
    CHECK(t.objectives[0] == doctest::Approx(activation_objective(net, x0, target)));
    CHECK(t.final_objective == doctest::Approx(activation_objective(net, t.image, target)));
  }
}

TEST_CASE("inversion step follows the regularized loss gradient") {
  const Network net = build_reference_cnn(7);
  const Tensor img = read_image(fixture("digit0.pgm"));
  const std::size_t layer = net.layer_index("conv2");
  const Tensor target = ForwardPass(net, img).output(layer);
  const Tensor x0 = random_tensor(net.input_shape(), 42, 0.3, 0.7);
  OptimizationConfig cfg = default_inversion_config("conv2");
  cfg.init = x0;
  cfg.num_iter = 1;
  cfg.learning_rate = 1e-4;
  cfg.tv_weight = 0.05;
  cfg.alpha_weight = 1e-8;
  const OptimizationTrace t = invert_features(net, img, "conv2", cfg);
  const std::vector<double> g = implied_gradient(x0, t.image, -cfg.learning_rate);
  for (std::size_t i = 0; i < g.size(); i += 23) {
    const double eps = 1e-3;
    std::vector<double> up = to_double(x0), dn = up;
    up[i] += eps;
    dn[i] -= eps;
    const Tensor tu(x0.shape(), std::vector<float>(up.begin(), up.end()));
    const Tensor td(x0.shape(), std::vector<float>(dn.begin(), dn.end()));
    const double fd =
        (inversion_objective(net, tu, target, layer, cfg) - inversion_objective(net, td, target, layer, cfg)) / (2 * eps);
    CHECK(g[i] == doctest::Approx(fd).epsilon(0.02).scale(0.01));
  }
  CHECK(t.objectives[0] == doctest::Approx(inversion_objective(net, x0, target, layer, cfg)));
  // At the target image only the regularizers remain.
  const double at_target = inversion_objective(net, img, target, layer, cfg);
  double n2 = 0.0;
  for (float v : img.data()) n2 += double(v) * v;
  CHECK(at_target == doctest::Approx(cfg.tv_weight * total_variation(img) + cfg.alpha_weight * n2 * n2 * n2));
}

TEST_CASE("optimization is seeded and stays in range") {
  const Network net = build_reference_cnn(7);
  const OptimizationConfig cfg = [] {
    OptimizationConfig c = default_ascent_config({TargetKind::kFilter, "conv1", 3});
    c.num_iter = 15;
    c.learning_rate = 0.5;
    c.seed = 4;
    return c;
  }();
  const OptimizationTrace a = maximize_activation(net, cfg);
  const OptimizationTrace b = maximize_activation(net, cfg);
  CHECK(a.image == b.image);
  CHECK(a.objectives == b.objectives);
  CHECK(a.objectives.size() == 15);
  OptimizationConfig other = cfg;
  other.seed = 5;
  CHECK_FALSE(maximize_activation(net, other).image == a.image);
  for (float v : a.image.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("deep dream starts from the given image") {
  const Network net = build_reference_cnn(7);
  const Tensor img = read_image(fixture("digit0.pgm"));
  OptimizationConfig cfg = default_ascent_config({});
  cfg.num_iter = 3;
  const OptimizationTrace t = deep_dream(net, img, "conv2", 7, cfg);
  CHECK(t.objectives[0] == doctest::Approx(activation_objective(net, img, {TargetKind::kFilter, "conv2", 7})));
}

TEST_CASE("identity inversion recovers the image") {
  const Network net = identity_net();
  const Tensor target = random_tensor({1, 4, 4}, 43, 0.1, 0.9);
  OptimizationConfig cfg = default_inversion_config("id");
  cfg.tv_weight = 0.0;
  cfg.learning_rate = 2.0;
  const OptimizationTrace t = invert_features(net, target, "id", cfg);
  for (std::size_t i = 0; i < 16; ++i) CHECK(t.image[i] == doctest::Approx(target[i]).epsilon(1e-4));
  CHECK(t.final_objective < 1e-8);
}

TEST_CASE("global optimization errors") {
  const Network net = build_reference_cnn(7);
  auto ascent = [&](OptimizationTarget target) {
    OptimizationConfig c = default_ascent_config(std::move(target));
    c.num_iter = 1;
    return maximize_activation(net, c);
  };
  CHECK(code_of([&] { ascent({TargetKind::kFilter, "conv2", 32}); }) == ErrorCode::kFilterIndexOutOfRange);
  CHECK(code_of([&] { ascent({TargetKind::kFilter, "conv2", -1}); }) == ErrorCode::kFilterIndexOutOfRange);
  CHECK(code_of([&] { ascent({TargetKind::kLogit, "", 4}); }) == ErrorCode::kInvalidTarget);
  CHECK(code_of([&] { ascent({TargetKind::kLayer, "conv7", 0}); }) == ErrorCode::kUnknownLayerName);
  CHECK(code_of([&] { ascent({TargetKind::kInverted, "conv2", 0}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { deep_dream(net, Tensor({1, 8, 8}), "conv2", 0, {}); }) == ErrorCode::kImageShapeMismatch);
  CHECK(code_of([&] { invert_features(net, Tensor({3, 16, 16}), "conv2", {}); }) == ErrorCode::kImageShapeMismatch);
  CHECK(code_of([&] { invert_features(identity_net(), Tensor({1, 4, 4}), "id", {}); }) ==
        ErrorCode::kZeroTargetActivation);
  OptimizationConfig bad = default_ascent_config({TargetKind::kFilter, "conv2", 0});
  bad.num_iter = 0;
  CHECK(code_of([&] { maximize_activation(net, bad); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("zero learning rate leaves the image unchanged") {
  const Network net = build_reference_cnn(7);
  const Tensor img = read_image(fixture("digit0.pgm"));
  OptimizationConfig cfg = default_ascent_config({TargetKind::kFilter, "conv2", 3});
  cfg.init = img;
  cfg.learning_rate = 0.0;
  cfg.jitter = 0;
  cfg.num_iter = 4;
  CHECK(maximize_activation(net, cfg).image == img);
}

TEST_CASE("one logit step on a linear model") {
  Layer fc = make_dense("fc", 16, 2);
  auto& d = std::get<Dense>(fc.params);
  Rng rng(80);
  for (auto& w : d.weights) w = static_cast<float>(rng.uniform(-1, 1));
  const Network net({1, 4, 4}, {make_flatten("flat"), fc});
  OptimizationConfig cfg = default_ascent_config({TargetKind::kLogit, "", 1});
  cfg.init = Tensor({1, 4, 4}, 0.5f);
  cfg.learning_rate = 0.1;
  cfg.l2_decay = 0.0;
  cfg.jitter = 0;
  cfg.num_iter = 1;
  const Tensor out = maximize_activation(net, cfg).image;
  for (int i = 0; i < 16; ++i) CHECK(out[static_cast<std::size_t>(i)] == doctest::Approx(0.5 + 0.1 * d.weight(1, i)).epsilon(1e-6));
}

TEST_CASE("deep dream is activation maximization from the image") {
  const Network net = build_reference_cnn(7);
  const Tensor img = read_image(fixture("digit0.pgm"));
  OptimizationConfig cfg = default_ascent_config({TargetKind::kFilter, "conv2", 3});
  cfg.num_iter = 20;
  const OptimizationTrace dream = deep_dream(net, img, "conv2", 3, cfg);
  cfg.init = img;
  const OptimizationTrace direct = maximize_activation(net, cfg);
  CHECK(dream.objectives == direct.objectives);
  CHECK(dream.image == direct.image);
  const double start = activation_objective(net, img, cfg.target);
  for (std::uint64_t s = 0; s < 3; ++s) {
    cfg.seed = s;
    CHECK(deep_dream(net, img, "conv2", 3, cfg).final_objective > start);
  }
}

TEST_CASE("inversion started at the target stays there") {
  const Network net = build_reference_cnn(7);
  const Tensor img = read_image(fixture("digit0.pgm"));
  OptimizationConfig cfg = default_inversion_config("conv2");
  cfg.init = img;
  cfg.tv_weight = 0.0;
  cfg.num_iter = 5;
  const OptimizationTrace t = invert_features(net, img, "conv2", cfg);
  CHECK(t.objectives[0] == 0.0);
  CHECK(t.image == img);
}
