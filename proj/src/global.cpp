#include "percept/global.hpp"

#include <algorithm>
#include <cmath>

#include "percept/error.hpp"
#include "percept/rng.hpp"

namespace percept {

namespace {

constexpr double kTvEpsilon = 1e-8;

void check_config(const OptimizationConfig& cfg) {
  if (cfg.num_iter < 1) throw Error(ErrorCode::kInvalidArgument, "num_iter must be >= 1");
  if (!(cfg.learning_rate >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be >= 0");
  if (!(cfg.l2_decay >= 0.0) || !(cfg.tv_weight >= 0.0) || !(cfg.alpha_weight >= 0.0) || cfg.jitter < 0) {
    throw Error(ErrorCode::kInvalidArgument, "regularizer weights and jitter must be >= 0");
  }
}

void check_image(const Network& net, const Tensor& image) {
  if (image.shape() != net.input_shape()) {
    throw Error(ErrorCode::kImageShapeMismatch, "image shape " + shape_to_string(image.shape()) +
                                                    " differs from network input " +
                                                    shape_to_string(net.input_shape()));
  }
}

void clamp01(Tensor& x) {
  for (auto& v : x.data()) v = std::clamp(v, 0.0f, 1.0f);
}

// Circular shift of every channel plane by (dy, dx).
Tensor roll(const Tensor& x, int dy, int dx) {
  if (x.rank() != 3 || (dy == 0 && dx == 0)) return x;
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out(x.shape());
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      const int ty = ((y + dy) % h + h) % h;
      for (int xx = 0; xx < w; ++xx) {
        const int tx = ((xx + dx) % w + w) % w;
        out.at(ch, ty, tx) = x.at(ch, y, xx);
      }
    }
  }
  return out;
}

struct ResolvedTarget {
  std::size_t layer;
  Tensor seed;  // dJ/d(layer output)
};

ResolvedTarget resolve(const Network& net, const OptimizationTarget& target) {
  ResolvedTarget r;
  switch (target.kind) {
    case TargetKind::kLogit: {
      r.layer = net.logit_layer();
      if (target.index < 0 || target.index >= net.class_count()) {
        throw Error(ErrorCode::kInvalidTarget, "class " + std::to_string(target.index) + " outside 0.." +
                                                   std::to_string(net.class_count() - 1));
      }
      r.seed = Tensor(net.output_shape(r.layer));
      r.seed[static_cast<std::size_t>(target.index)] = 1.0f;
      return r;
    }
    case TargetKind::kFilter: {
      r.layer = net.layer_index(target.layer);
      const Shape& shape = net.output_shape(r.layer);
      const int channels = shape[0];
      if (target.index < 0 || target.index >= channels) {
        throw Error(ErrorCode::kFilterIndexOutOfRange, "filter " + std::to_string(target.index) + " outside 0.." +
                                                           std::to_string(channels - 1) + " of layer '" +
                                                           target.layer + "'");
      }
      r.seed = Tensor(shape);
      const std::size_t plane = r.seed.size() / static_cast<std::size_t>(channels);
      for (std::size_t p = 0; p < plane; ++p) {
        r.seed[static_cast<std::size_t>(target.index) * plane + p] = static_cast<float>(1.0 / static_cast<double>(plane));
      }
      return r;
    }
    case TargetKind::kLayer: {
      r.layer = net.layer_index(target.layer);
      r.seed = Tensor(net.output_shape(r.layer));
      for (auto& v : r.seed.data()) v = static_cast<float>(1.0 / static_cast<double>(r.seed.size()));
      return r;
    }
    case TargetKind::kInverted: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "inversion targets go through invert_features");
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double squared_norm(const Tensor& x) { return dot(x, x); }

// d TV / dx for the isotropic forward-difference TV.
Tensor total_variation_gradient(const Tensor& x) {
  Tensor g(x.shape());
  if (x.rank() != 3) return g;
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < w; ++xx) {
        const double v = x.at(ch, y, xx);
        const double dx = xx + 1 < w ? x.at(ch, y, xx + 1) - v : 0.0;
        const double dy = y + 1 < h ? x.at(ch, y + 1, xx) - v : 0.0;
        const double r = std::sqrt(dx * dx + dy * dy + kTvEpsilon);
        g.at(ch, y, xx) = static_cast<float>(g.at(ch, y, xx) - (dx + dy) / r);
        if (xx + 1 < w) g.at(ch, y, xx + 1) = static_cast<float>(g.at(ch, y, xx + 1) + dx / r);
        if (y + 1 < h) g.at(ch, y + 1, xx) = static_cast<float>(g.at(ch, y + 1, xx) + dy / r);
      }
    }
  }
  return g;
}

}  // namespace

OptimizationConfig default_ascent_config(OptimizationTarget target) {
  OptimizationConfig cfg;
  cfg.target = std::move(target);
  cfg.learning_rate = kDefaultAscentRate;
  cfg.l2_decay = 1e-4;
  cfg.jitter = 2;
  return cfg;
}

OptimizationConfig default_inversion_config(std::string layer) {
  OptimizationConfig cfg;
  cfg.target = {TargetKind::kInverted, std::move(layer), 0};
  cfg.num_iter = 200;
  cfg.learning_rate = kDefaultInversionRate;
  cfg.l2_decay = 0.0;
  cfg.tv_weight = 1e-2;
  cfg.alpha_weight = 0.0;
  cfg.jitter = 0;
  return cfg;
}

Tensor noise_image(const Network& net, std::uint64_t seed) {
  Tensor x(net.input_shape());
  Rng rng(seed);
  for (auto& v : x.data()) v = static_cast<float>(std::clamp(0.5 + 0.1 * rng.normal(), 0.0, 1.0));
  return x;
}

double activation_objective(const Network& net, const Tensor& x, const OptimizationTarget& target) {
  const ResolvedTarget r = resolve(net, target);
  return dot(ForwardPass(net, x).output(r.layer), r.seed);
}

double total_variation(const Tensor& x) {
  if (x.rank() != 3) return 0.0;
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  double tv = 0.0;
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < w; ++xx) {
        const double v = x.at(ch, y, xx);
        const double dx = xx + 1 < w ? x.at(ch, y, xx + 1) - v : 0.0;
        const double dy = y + 1 < h ? x.at(ch, y + 1, xx) - v : 0.0;
        tv += std::sqrt(dx * dx + dy * dy + kTvEpsilon);
      }
    }
  }
  return tv;
}

OptimizationTrace maximize_activation(const Network& net, const OptimizationConfig& cfg) {
  check_config(cfg);
  const ResolvedTarget target = resolve(net, cfg.target);
  Tensor x = cfg.init ? *cfg.init : noise_image(net, cfg.seed);
  check_image(net, x);
  Rng jitter_rng(derive_seed(cfg.seed, 1));
  const auto lr = static_cast<float>(cfg.learning_rate);
  const auto decay = static_cast<float>(cfg.l2_decay);

  OptimizationTrace trace;
  trace.objectives.reserve(static_cast<std::size_t>(cfg.num_iter));
  for (int it = 0; it < cfg.num_iter; ++it) {
    int dy = 0, dx = 0;
    if (cfg.jitter > 0) {
      dy = jitter_rng.uniform_int(-cfg.jitter, cfg.jitter);
      dx = jitter_rng.uniform_int(-cfg.jitter, cfg.jitter);
    }
    trace.objectives.push_back(dot(ForwardPass(net, x).output(target.layer), target.seed));
    Tensor shifted = roll(x, dy, dx);
    const ForwardPass pass(net, shifted);
    const Tensor grad = backpropagate(pass, target.layer, target.seed, PropagationRule::kStandard).input_gradient;
    for (std::size_t i = 0; i < shifted.size(); ++i) {
      shifted[i] += lr * (grad[i] - 2.0f * decay * shifted[i]);
    }
    x = roll(shifted, -dy, -dx);
    clamp01(x);
    x.check_finite("optimized image");
  }
  trace.final_objective = dot(ForwardPass(net, x).output(target.layer), target.seed);
  trace.image = std::move(x);
  return trace;
}

OptimizationTrace deep_dream(const Network& net, const Tensor& image, const std::string& layer, int filter,
                             OptimizationConfig cfg) {
  check_image(net, image);
  cfg.target = {TargetKind::kFilter, layer, filter};
  cfg.init = image;
  return maximize_activation(net, cfg);
}

double inversion_objective(const Network& net, const Tensor& x, const Tensor& target_activation,
                           std::size_t layer, const OptimizationConfig& cfg) {
  const Tensor phi = ForwardPass(net, x).output(layer);
  double diff = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double d = static_cast<double>(phi[i]) - target_activation[i];
    diff += d * d;
  }
  const double n2 = squared_norm(x);
  return diff / squared_norm(target_activation) + cfg.tv_weight * total_variation(x) +
         cfg.alpha_weight * n2 * n2 * n2;
}

OptimizationTrace invert_features(const Network& net, const Tensor& image, const std::string& layer,
                                  OptimizationConfig cfg) {
  check_config(cfg);
  check_image(net, image);
  const std::size_t idx = net.layer_index(layer);
  const Tensor target = ForwardPass(net, image).output(idx);
  const double target_norm2 = squared_norm(target);
  if (!(target_norm2 > 0.0)) {
    throw Error(ErrorCode::kZeroTargetActivation,
                "layer '" + layer + "' is all zeros on the target image; the inversion loss is undefined");
  }
  cfg.target = {TargetKind::kInverted, layer, 0};
  Tensor x = cfg.init ? *cfg.init : noise_image(net, cfg.seed);
  check_image(net, x);

  OptimizationTrace trace;
  trace.objectives.reserve(static_cast<std::size_t>(cfg.num_iter));
  for (int it = 0; it < cfg.num_iter; ++it) {
    const ForwardPass pass(net, x);
    const Tensor& phi = pass.output(idx);
    Tensor seed(phi.shape());
    for (std::size_t i = 0; i < phi.size(); ++i) {
      seed[i] = static_cast<float>(2.0 * (static_cast<double>(phi[i]) - target[i]) / target_norm2);
    }
    trace.objectives.push_back(inversion_objective(net, x, target, idx, cfg));
    Tensor grad = backpropagate(pass, idx, seed, PropagationRule::kStandard).input_gradient;
    if (cfg.tv_weight > 0.0) {
      const Tensor tv = total_variation_gradient(x);
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += static_cast<float>(cfg.tv_weight * tv[i]);
    }
    if (cfg.alpha_weight > 0.0) {
      const double n2 = squared_norm(x);
      const double scale = 6.0 * cfg.alpha_weight * n2 * n2;
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += static_cast<float>(scale * x[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = static_cast<float>(x[i] - cfg.learning_rate * grad[i]);
    }
    clamp01(x);
    x.check_finite("optimized image");
  }
  trace.final_objective = inversion_objective(net, x, target, idx, cfg);
  trace.image = std::move(x);
  return trace;
}

}  // namespace percept
