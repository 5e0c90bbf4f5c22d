#include "percept/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>

#include "percept/error.hpp"
#include "percept/parallel.hpp"
#include "percept/rng.hpp"

namespace percept {

void validate_probabilities(const ProbMatrix& probs, std::size_t expected_rows, int num_classes) {
  if (static_cast<std::size_t>(probs.rows()) != expected_rows || probs.cols() != num_classes) {
    throw Error(ErrorCode::kPredictorFailure,
                "predictor returned a " + std::to_string(probs.rows()) + "x" +
                    std::to_string(probs.cols()) + " matrix, expected " +
                    std::to_string(expected_rows) + "x" + std::to_string(num_classes));
  }
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      const double p = probs(r, c);
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw Error(ErrorCode::kPredictorFailure,
                    "probability outside [0,1] in row " + std::to_string(r));
      }
      sum += p;
    }
    // float32 models round; anything beyond this is a broken predictor
    if (std::abs(sum - 1.0) > 1e-5) {
      throw Error(ErrorCode::kPredictorFailure,
                  "probabilities in row " + std::to_string(r) + " sum to " + std::to_string(sum));
    }
  }
}

namespace {

void fill_uniform(std::vector<float>& values, Rng& rng) {
  for (auto& v : values) v = static_cast<float>(rng.uniform(-0.5, 0.5));
}

Network reference_topology(std::uint64_t seed) {
  std::vector<Layer> layers;
  layers.push_back(make_conv2d("conv1", 1, 8, 3, 1, 1));
  layers.push_back(make_relu("relu1"));
  layers.push_back(make_maxpool2d("pool1", 2, 2));
  layers.push_back(make_conv2d("conv2", 8, 32, 3, 1, 1));
  layers.push_back(make_relu("relu2"));
  layers.push_back(make_maxpool2d("pool2", 2, 2));
  layers.push_back(make_flatten("flatten"));
  layers.push_back(make_dense("fc1", 32 * 4 * 4, 32));
  layers.push_back(make_relu("relu3"));
  layers.push_back(make_dense("fc2", 32, 4));
  layers.push_back(make_softmax("softmax"));

  Rng rng(seed);
  for (auto& layer : layers) {
    if (auto* c = std::get_if<Conv2d>(&layer.params)) {
      fill_uniform(c->weights, rng);
      fill_uniform(c->bias, rng);
    } else if (auto* d = std::get_if<Dense>(&layer.params)) {
      fill_uniform(d->weights, rng);
      fill_uniform(d->bias, rng);
    }
  }
  return Network({1, 16, 16}, std::move(layers));
}

}  // namespace

Network build_reference_cnn(std::uint64_t seed) { return reference_topology(seed); }

// Planted construction, for inputs in [0,1]:
//   conv1 ch0..3 are border detectors: relu(1 - 50 * sum of the three pixels
//   above / below / left of / right of the centre). They read zero padding only
//   along their border, so they equal 1 on row 0 / row 15 / col 0 / col 15.
//   conv1 ch4 is a 3x3 box filter (local brightness). ch5..7 keep seeded
//   weights and feed nothing.
//   conv2 ch q (q = 0..3) adds the two border detectors of one corner plus
//   0.4 * brightness, minus 1.5, at the centre tap: only the corner cell of
//   the 8x8 map is positive. All other conv2 channels are zero.
//   fc1 unit q reads conv2 ch q at its corner cell of the 4x4 pooled map;
//   fc2 maps unit q to logit q with gain 4. Every other weight is zero.
// Class q's logit therefore depends on the input only through the 3x3 pixel
// block in its corner (rows/cols 0..6 of the receptive field at most).
Network build_quadrant_planted_cnn(std::uint64_t seed) {
  Network base = reference_topology(seed);
  std::vector<Layer> layers = base.layers();

  constexpr float kBorderGain = 50.0f;
  constexpr float kBrightnessGain = 0.4f;
  constexpr float kLogitGain = 4.0f;
  enum { kTop = 0, kBottom = 1, kLeft = 2, kRight = 3, kBright = 4 };

  auto& conv1 = std::get<Conv2d>(layers[0].params);
  for (int ch = 0; ch <= kBright; ++ch) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) conv1.weight(ch, 0, ky, kx) = 0.0f;
    }
  }
  for (int k = 0; k < 3; ++k) {
    conv1.weight(kTop, 0, 0, k) = -kBorderGain;
    conv1.weight(kBottom, 0, 2, k) = -kBorderGain;
    conv1.weight(kLeft, 0, k, 0) = -kBorderGain;
    conv1.weight(kRight, 0, k, 2) = -kBorderGain;
  }
  for (int ky = 0; ky < 3; ++ky) {
    for (int kx = 0; kx < 3; ++kx) conv1.weight(kBright, 0, ky, kx) = 1.0f / 9.0f;
  }
  conv1.bias[kTop] = conv1.bias[kBottom] = conv1.bias[kLeft] = conv1.bias[kRight] = 1.0f;
  conv1.bias[kBright] = 0.0f;

  struct Corner {
    int vertical, horizontal, pooled_y, pooled_x;
  };
  const Corner corners[4] = {
      {kTop, kLeft, 0, 0}, {kTop, kRight, 0, 3}, {kBottom, kLeft, 3, 0}, {kBottom, kRight, 3, 3}};

  auto& conv2 = std::get<Conv2d>(layers[3].params);
  std::fill(conv2.weights.begin(), conv2.weights.end(), 0.0f);
  std::fill(conv2.bias.begin(), conv2.bias.end(), 0.0f);
  auto& fc1 = std::get<Dense>(layers[7].params);
  std::fill(fc1.weights.begin(), fc1.weights.end(), 0.0f);
  std::fill(fc1.bias.begin(), fc1.bias.end(), 0.0f);
  auto& fc2 = std::get<Dense>(layers[9].params);
  std::fill(fc2.weights.begin(), fc2.weights.end(), 0.0f);
  std::fill(fc2.bias.begin(), fc2.bias.end(), 0.0f);

  for (int q = 0; q < 4; ++q) {
    const Corner& c = corners[q];
    conv2.weight(q, c.vertical, 1, 1) = 1.0f;
    conv2.weight(q, c.horizontal, 1, 1) = 1.0f;
    conv2.weight(q, kBright, 1, 1) = kBrightnessGain;
    conv2.bias[q] = -1.5f;
    fc1.weight(q, q * 16 + c.pooled_y * 4 + c.pooled_x) = 1.0f;
    fc2.weight(q, q) = kLogitGain;
  }
  return Network(base.input_shape(), std::move(layers));
}

ImagePredictor network_predictor(const Network& net, std::vector<std::string> class_names) {
  auto model = std::make_shared<const Network>(net);
  return ImagePredictor(
      [model](std::span<const Tensor> batch) {
        const int k = model->class_count();
        ProbMatrix out(static_cast<Eigen::Index>(batch.size()), k);
        parallel_for(batch.size(), [&](std::size_t i) {
          ForwardPass pass(*model, batch[i]);
          for (int c = 0; c < k; ++c) {
            out(static_cast<Eigen::Index>(i), c) = pass.probs()[static_cast<std::size_t>(c)];
          }
        });
        return out;
      },
      net.class_count(), std::move(class_names));
}

TabularPredictor build_linear_tabular(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                      std::vector<std::string> class_names) {
  if (weights.rows() != bias.size() || weights.rows() < 1 || weights.cols() < 1) {
    throw Error(ErrorCode::kShapeMismatch, "linear model needs K x D weights and K biases");
  }
  if (!class_names.empty() && static_cast<Eigen::Index>(class_names.size()) != weights.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "class name count does not match K");
  }
  return TabularPredictor(
      [weights, bias](std::span<const TabularRow> rows) {
        ProbMatrix out(static_cast<Eigen::Index>(rows.size()), weights.rows());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (static_cast<Eigen::Index>(rows[i].size()) != weights.cols()) {
            throw Error(ErrorCode::kShapeMismatch, "row " + std::to_string(i) + " has " +
                                                       std::to_string(rows[i].size()) + " features, model expects " +
                                                       std::to_string(weights.cols()));
          }
          const Eigen::Map<const Eigen::VectorXd> x(rows[i].data(), weights.cols());
          Eigen::VectorXd s = weights * x + bias;
          s.array() -= s.maxCoeff();
          s = s.array().exp();
          out.row(static_cast<Eigen::Index>(i)) = (s / s.sum()).transpose();
        }
        return out;
      },
      static_cast<int>(weights.rows()), std::move(class_names));
}

BowTextClassifier::BowTextClassifier(std::map<std::string, std::vector<double>> token_weights,
                                     std::vector<double> bias, std::vector<std::string> class_names)
    : weights_(std::move(token_weights)), bias_(std::move(bias)), class_names_(std::move(class_names)) {
  if (bias_.empty()) throw Error(ErrorCode::kShapeMismatch, "text classifier needs at least one class");
  for (const auto& [token, w] : weights_) {
    if (w.size() != bias_.size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "token '" + token + "' has " + std::to_string(w.size()) + " weights, expected " +
                      std::to_string(bias_.size()));
    }
  }
  if (class_names_.empty()) {
    for (std::size_t k = 0; k < bias_.size(); ++k) class_names_.push_back("class_" + std::to_string(k));
  }
}

std::vector<std::string> BowTextClassifier::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Eigen::VectorXd BowTextClassifier::scores(std::string_view text) const {
  Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(bias_.data(), static_cast<Eigen::Index>(bias_.size()));
  for (const auto& token : tokenize(text)) {
    if (auto it = weights_.find(token); it != weights_.end()) {
      for (std::size_t k = 0; k < bias_.size(); ++k) s[static_cast<Eigen::Index>(k)] += it->second[k];
    }
  }
  return s;
}

ProbMatrix BowTextClassifier::predict(std::span<const std::string> texts) const {
  ProbMatrix out(static_cast<Eigen::Index>(texts.size()), num_classes());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Eigen::VectorXd s = scores(texts[i]);
    s.array() -= s.maxCoeff();
    s = s.array().exp();
    out.row(static_cast<Eigen::Index>(i)) = (s / s.sum()).transpose();
  }
  return out;
}

TextPredictor BowTextClassifier::as_predictor() const {
  BowTextClassifier copy = *this;
  return TextPredictor([copy](std::span<const std::string> texts) { return copy.predict(texts); },
                       num_classes(), class_names_);
}

BowTextClassifier build_bow_text_classifier(std::map<std::string, std::vector<double>> token_weights,
                                            std::vector<double> bias,
                                            std::vector<std::string> class_names) {
  return BowTextClassifier(std::move(token_weights), std::move(bias), std::move(class_names));
}

}  // namespace percept
