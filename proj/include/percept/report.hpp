#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "percept/anchors.hpp"
#include "percept/global.hpp"
#include "percept/perturbation.hpp"
#include "percept/saliency.hpp"

namespace percept {

inline constexpr int kReportVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// One CLI run. Output paths are relative to the report's directory.
struct Report {
  std::string command;
  std::string method;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<std::string> outputs;
  nlohmann::ordered_json explanation = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
};

nlohmann::ordered_json to_json(const Explanation& e);
nlohmann::ordered_json to_json(const AnchorResult& r);
nlohmann::ordered_json to_json(const OptimizationTrace& trace, const OptimizationConfig& cfg);
nlohmann::ordered_json to_json(const SaliencyMap& map);

// Serialized report; `timestamp` is the only field that varies between
// otherwise identical runs.
std::string serialize_report(const Report& report, const std::string& timestamp);

// Current UTC time as 2026-01-31T12:00:00Z.
std::string utc_timestamp();

}  // namespace percept
