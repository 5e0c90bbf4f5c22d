#include "percept/model_files.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "percept/error.hpp"

namespace percept {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, path.string() + ": " + e.what());
  }
}

template <class T>
T field(const json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key)) throw Error(ErrorCode::kFormatError, path.string() + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, path.string() + ": field \"" + key + "\": " + e.what());
  }
}

}  // namespace

BowTextClassifier load_bow_model(const std::filesystem::path& path) {
  const json j = read_json(path);
  return BowTextClassifier(field<std::map<std::string, std::vector<double>>>(j, "token_weights", path),
                           field<std::vector<double>>(j, "bias", path),
                           j.value("class_names", std::vector<std::string>{}));
}

std::string bow_model_json(const BowTextClassifier& model) {
  json j;
  j["class_names"] = model.class_names();
  j["bias"] = model.bias();
  j["token_weights"] = model.token_weights();
  return j.dump(2) + "\n";
}

TabularPredictor LinearTabularModel::predictor() const {
  return build_linear_tabular(weights, bias, class_names);
}

LinearTabularModel load_linear_tabular_model(const std::filesystem::path& path) {
  const json j = read_json(path);
  LinearTabularModel m;
  m.feature_names = j.value("feature_names", std::vector<std::string>{});
  m.class_names = field<std::vector<std::string>>(j, "class_names", path);
  m.categorical = j.value("categorical", std::vector<std::string>{});
  const auto rows = field<std::vector<std::vector<double>>>(j, "weights", path);
  const auto bias = field<std::vector<double>>(j, "bias", path);
  if (rows.empty() || rows.size() != bias.size() || rows.size() != m.class_names.size()) {
    throw Error(ErrorCode::kShapeMismatch, path.string() + ": weights, bias and class_names disagree in length");
  }
  m.weights.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != rows[0].size()) throw Error(ErrorCode::kShapeMismatch, path.string() + ": ragged weights");
    for (std::size_t d = 0; d < rows[k].size(); ++d) {
      m.weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d)) = rows[k][d];
    }
  }
  m.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
  return m;
}

std::string linear_tabular_model_json(const LinearTabularModel& model) {
  json j;
  j["feature_names"] = model.feature_names;
  j["class_names"] = model.class_names;
  j["categorical"] = model.categorical;
  json rows = json::array();
  for (Eigen::Index k = 0; k < model.weights.rows(); ++k) {
    std::vector<double> r(model.weights.row(k).begin(), model.weights.row(k).end());
    rows.push_back(r);
  }
  j["weights"] = rows;
  j["bias"] = std::vector<double>(model.bias.begin(), model.bias.end());
  return j.dump(2) + "\n";
}

}  // namespace percept
