#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "percept/network.hpp"

namespace percept {

// N x K matrix of class probabilities, one row per input.
using ProbMatrix = Eigen::MatrixXd;
using TabularRow = std::vector<double>;

// Throws PredictorFailure unless every row lies in [0,1] and sums to 1.
void validate_probabilities(const ProbMatrix& probs, std::size_t expected_rows, int num_classes);

// Black-box model: batch in, probability rows out. The only thing the
// perturbation explainers are allowed to touch.
template <class Input>
class Predictor {
 public:
  using BatchFn = std::function<ProbMatrix(std::span<const Input>)>;

  Predictor(BatchFn fn, int num_classes, std::vector<std::string> class_names = {})
      : fn_(std::move(fn)), num_classes_(num_classes), class_names_(std::move(class_names)) {
    if (class_names_.empty()) {
      for (int k = 0; k < num_classes_; ++k) class_names_.push_back("class_" + std::to_string(k));
    }
  }

  ProbMatrix predict_proba(std::span<const Input> batch) const {
    ProbMatrix probs = fn_(batch);
    validate_probabilities(probs, batch.size(), num_classes_);
    return probs;
  }

  int num_classes() const noexcept { return num_classes_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }

 private:
  BatchFn fn_;
  int num_classes_;
  std::vector<std::string> class_names_;
};

using ImagePredictor = Predictor<Tensor>;
using TextPredictor = Predictor<std::string>;
using TabularPredictor = Predictor<TabularRow>;

// 1x16x16 input, 4 classes. Layers: conv1 relu1 pool1 conv2 relu2 pool2
// flatten fc1 relu3 fc2 softmax. Weights uniform(-0.5, 0.5) from `seed`,
// drawn layer by layer, weights before biases.
Network build_reference_cnn(std::uint64_t seed = 7);

// Same topology with a hand-built class pathway: class q (0=top-left,
// 1=top-right, 2=bottom-left, 3=bottom-right) reads only a corner detector for
// its own image quadrant. See models.cpp for the exact construction.
Network build_quadrant_planted_cnn(std::uint64_t seed = 7);

ImagePredictor network_predictor(const Network& net, std::vector<std::string> class_names = {});

// predict_proba = softmax(W x + b) per row. W is K x D.
TabularPredictor build_linear_tabular(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                      std::vector<std::string> class_names = {});

// Bag-of-words scorer: lowercase whitespace tokens, score_k = sum of token
// weights + bias_k, softmax. Unknown tokens contribute nothing.
class BowTextClassifier {
 public:
  BowTextClassifier(std::map<std::string, std::vector<double>> token_weights,
                    std::vector<double> bias, std::vector<std::string> class_names = {});

  static std::vector<std::string> tokenize(std::string_view text);

  int num_classes() const noexcept { return static_cast<int>(bias_.size()); }
  Eigen::VectorXd scores(std::string_view text) const;
  ProbMatrix predict(std::span<const std::string> texts) const;
  TextPredictor as_predictor() const;

  const std::map<std::string, std::vector<double>>& token_weights() const noexcept { return weights_; }
  const std::vector<double>& bias() const noexcept { return bias_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }

 private:
  std::map<std::string, std::vector<double>> weights_;
  std::vector<double> bias_;
  std::vector<std::string> class_names_;
};

BowTextClassifier build_bow_text_classifier(std::map<std::string, std::vector<double>> token_weights,
                                            std::vector<double> bias,
                                            std::vector<std::string> class_names = {});

}  // namespace percept
