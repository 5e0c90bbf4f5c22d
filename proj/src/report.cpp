#include "percept/report.hpp"

#include <chrono>
#include <ctime>

namespace percept {

using nlohmann::ordered_json;

namespace {

ordered_json weights_json(const std::vector<FeatureWeight>& weights) {
  ordered_json arr = ordered_json::array();
  for (const auto& w : weights) arr.push_back({{"feature", w.feature}, {"name", w.name}, {"weight", w.weight}});
  return arr;
}

const char* target_kind_name(TargetKind kind) {
  switch (kind) {
    case TargetKind::kFilter: return "filter";
    case TargetKind::kLayer: return "layer";
    case TargetKind::kLogit: return "logit";
    case TargetKind::kInverted: return "inverted";
  }
  return "unknown";
}

}  // namespace

ordered_json to_json(const Explanation& e) {
  ordered_json j;
  j["method"] = e.method;
  j["label"] = e.label;
  j["class_name"] = e.class_name;
  j["label_probability"] = e.label_probability;
  j["intercept"] = e.intercept;
  j["weights"] = weights_json(e.weights);
  if (e.method == "cle") {
    ordered_json pairs = ordered_json::array();
    for (const auto& p : e.pairs) pairs.push_back({{"i", p.i}, {"j", p.j}, {"weight", p.weight}});
    j["pairs"] = std::move(pairs);
    j["singleton_projection"] = weights_json(e.singleton_projection);
  }
  j["fit_quality"] = e.fit_quality;
  j["n_samples"] = e.n_samples;
  j["seed"] = e.seed;
  return j;
}

ordered_json to_json(const AnchorResult& r) {
  ordered_json j;
  j["method"] = "anchor";
  j["label"] = r.label;
  j["class_name"] = r.class_name;
  ordered_json preds = ordered_json::array();
  for (const auto& p : r.predicates) preds.push_back({{"feature", p.feature}, {"predicate", p.text}});
  j["predicates"] = std::move(preds);
  j["precision"] = r.precision;
  j["precision_lower_bound"] = r.precision_lower_bound;
  j["coverage"] = r.coverage;
  j["samples_used"] = r.samples_used;
  j["below_target"] = r.below_target;
  return j;
}

ordered_json to_json(const OptimizationTrace& trace, const OptimizationConfig& cfg) {
  ordered_json j;
  j["target"] = {{"kind", target_kind_name(cfg.target.kind)}, {"layer", cfg.target.layer}, {"index", cfg.target.index}};
  j["config"] = {{"num_iter", cfg.num_iter},         {"learning_rate", cfg.learning_rate},
                 {"l2_decay", cfg.l2_decay},         {"tv_weight", cfg.tv_weight},
                 {"alpha_weight", cfg.alpha_weight}, {"jitter", cfg.jitter},
                 {"seed", cfg.seed},                 {"init", cfg.init ? "image" : "noise"}};
  j["objectives"] = trace.objectives;
  j["final_objective"] = trace.final_objective;
  return j;
}

ordered_json to_json(const SaliencyMap& map) {
  return {{"height", map.height},
          {"width", map.width},
          {"signed", map.signedness == Signedness::kSigned},
          {"values", map.values}};
}

std::string serialize_report(const Report& report, const std::string& timestamp) {
  ordered_json j;
  j["report_version"] = kReportVersion;
  j["tool"] = "percept";
  j["tool_version"] = kToolVersion;
  j["timestamp"] = timestamp;
  j["command"] = report.command;
  j["method"] = report.method;
  j["seed"] = report.seed;
  j["inputs"] = report.inputs;
  j["parameters"] = report.parameters;
  j["outputs"] = report.outputs;
  j["explanation"] = report.explanation;
  return j.dump(2) + "\n";
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace percept
