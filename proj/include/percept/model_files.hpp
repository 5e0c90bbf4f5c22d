#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "percept/dataset.hpp"
#include "percept/models.hpp"

namespace percept {

// JSON: {"class_names": [...], "bias": [...], "token_weights": {"tok": [...]}}
BowTextClassifier load_bow_model(const std::filesystem::path& path);
std::string bow_model_json(const BowTextClassifier& model);

// JSON: {"feature_names": [...], "class_names": [...], "categorical": [...],
//        "weights": [[...] per class], "bias": [...]}
// Categorical features enter the linear score through their integer code.
struct LinearTabularModel {
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::vector<std::string> categorical;
  Eigen::MatrixXd weights;  // K x D
  Eigen::VectorXd bias;

  TabularPredictor predictor() const;
  CsvHints csv_hints() const { return {categorical, class_names}; }
};

LinearTabularModel load_linear_tabular_model(const std::filesystem::path& path);
std::string linear_tabular_model_json(const LinearTabularModel& model);

}  // namespace percept
