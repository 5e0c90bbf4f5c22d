#include "percept/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "percept/anchors.hpp"
#include "percept/error.hpp"
#include "percept/global.hpp"
#include "percept/gradient_explainers.hpp"
#include "percept/image_io.hpp"
#include "percept/model_files.hpp"
#include "percept/models.hpp"
#include "percept/perturbation.hpp"
#include "percept/render.hpp"
#include "percept/report.hpp"
#include "percept/shap.hpp"
#include "percept/weights_io.hpp"

namespace percept {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::array<MethodInfo, 17> kMethods = {{
    {"gradcam", "Grad-CAM", "explain-image"},
    {"gradcampp", "Grad-CAM++", "explain-image"},
    {"scorecam", "Score-CAM", "explain-image"},
    {"vanilla", "Vanilla-BP", "explain-image"},
    {"guided", "Guided-BP", "explain-image"},
    {"smoothgrad", "SmoothGrad", "explain-image"},
    {"ig", "IntegrateGrad", "explain-image"},
    {"lime", "LIME", "explain-image explain-text explain-tabular"},
    {"shap", "SHAP", "explain-image explain-text explain-tabular"},
    {"anchor", "Anchors", "explain-image explain-text explain-tabular"},
    {"cle", "CLE", "explain-image explain-text explain-tabular"},
    {"filter", "Max-Activation", "global"},
    {"layer", "Max-Activation", "global"},
    {"logit", "Max-Activation", "global"},
    {"deepdream", "Max-Activation", "global"},
    {"inverted", "Invert-Feature", "global"},
    {"make-model", "model builder", "make-model"},
}};

std::vector<std::string> methods_for(std::string_view subcommand) {
  std::vector<std::string> names;
  for (const auto& m : kMethods) {
    std::istringstream words{std::string(m.subcommands)};
    std::string w;
    while (words >> w) {
      if (w == subcommand && m.name != "make-model") names.emplace_back(m.name);
    }
  }
  return names;
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string method;
  std::string model;
  std::string input;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> target_class;
  int top_labels = 1;
  std::optional<int> samples;
  std::string colormap = "jet";
  double alpha = 0.5;
  // image
  std::string target_layer;
  std::string grid = "4x4";
  double sigma = 0.15;
  int steps = 64;
  bool exact = false;
  int top_k = 10;
  // text
  std::string text;
  std::optional<int> line;
  // tabular
  std::string data;
  int row = 0;
  bool discretize = false;
  // global
  std::optional<int> target_filter;
  int num_iter = 10;
  std::optional<double> lr;
  std::optional<double> decay;
  std::optional<double> tv;
  std::optional<int> jitter;
  // make-model
  std::string kind = "reference";
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("PERCEPT_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t v = 0;
    const char* end = env + std::strlen(env);
    const auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || ptr != end) {
      throw UsageError(std::string("PERCEPT_SEED must be a non-negative integer, got '") + env + "'");
    }
    return v;
  }
  return 0;
}

std::string compact_timestamp() {
  std::string ts = utc_timestamp();
  ts.erase(std::remove_if(ts.begin(), ts.end(), [](char c) { return c == '-' || c == ':'; }), ts.end());
  return ts;
}

class Run {
 public:
  Run(std::string command, const Options& o, std::uint64_t seed) {
    report_.command = std::move(command);
    report_.method = o.method;
    report_.seed = seed;
    dir_ = o.out.empty() ? fs::path("out") / (compact_timestamp() + "-" + o.method) : fs::path(o.out);
    fs::create_directories(dir_);
  }

  Report& report() { return report_; }
  const fs::path& dir() const { return dir_; }

  void image(const std::string& name, const Tensor& t) {
    write_image(t, dir_ / name);
    report_.outputs.push_back(name);
  }

  void text_file(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + (dir_ / name).string());
    f << content;
    report_.outputs.push_back(name);
  }

  void finish(std::ostream& out) {
    const std::string path = (dir_ / "report.json").string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path);
    f << serialize_report(report_, utc_timestamp());
    out << path << "\n";
  }

 private:
  Report report_;
  fs::path dir_;
};

std::pair<int, int> parse_grid(const std::string& grid) {
  const auto x = grid.find('x');
  int r = 0, c = 0;
  if (x != std::string::npos) {
    const auto [p1, e1] = std::from_chars(grid.data(), grid.data() + x, r);
    const auto [p2, e2] = std::from_chars(grid.data() + x + 1, grid.data() + grid.size(), c);
    if (e1 == std::errc() && e2 == std::errc() && p1 == grid.data() + x && p2 == grid.data() + grid.size()) {
      return {r, c};
    }
  }
  throw UsageError("--grid expects ROWSxCOLS, e.g. 4x4; got '" + grid + "'");
}

Colormap parse_colormap(const std::string& name) { return name == "gray" ? Colormap::kGray : Colormap::kJet; }

std::string default_cam_layer(const Network& net) {
  std::string name;
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    if (net.output_shape(i).size() == 3) name = net.layers()[i].name;
  }
  if (name.empty()) throw Error(ErrorCode::kNonSpatialLayer, "network has no [C,H,W] layer for a class activation map");
  return name;
}

int predicted_label(const InterpretableInstance& instance) {
  const ProbMatrix p = instance.evaluate_coalitions(Eigen::MatrixXd::Ones(1, instance.dimension()));
  Eigen::Index arg = 0;
  p.row(0).maxCoeff(&arg);
  return static_cast<int>(arg);
}

LimeOptions lime_options(const Options& o, std::uint64_t seed) {
  LimeOptions lo;
  lo.num_samples = o.samples.value_or(1000);
  lo.top_k = o.top_k;
  lo.seed = seed;
  return lo;
}

// Shared tail of the three perturbation subcommands. `extra` renders modality
// specific artifacts for an explanation or anchor.
void run_perturbation(Run& run, const Options& o, std::uint64_t seed, const InterpretableInstance& instance,
                      const std::function<void(const std::string& suffix, const Explanation&)>& extra_weights,
                      const std::function<void(const AnchorResult&)>& extra_anchor) {
  auto& rep = run.report();
  rep.parameters["samples"] = o.samples.value_or(o.method == "shap" ? 2048 : 1000);
  rep.parameters["top_k"] = o.top_k;
  rep.explanation["num_features"] = instance.dimension();
  if (o.method == "lime" || o.method == "cle") {
    const LimeOptions lo = lime_options(o, seed);
    std::vector<Explanation> exps;
    std::vector<int> labels;
    if (o.target_class) {
      labels.push_back(*o.target_class);
    } else if (o.method == "lime") {
      exps = lime_explain_top(instance, o.top_labels, lo);
    } else {
      const ProbMatrix p = instance.evaluate_coalitions(Eigen::MatrixXd::Ones(1, instance.dimension()));
      labels = top_labels(p.row(0), o.top_labels);
    }
    if (exps.empty()) {
      exps = o.method == "lime" ? lime_explain_labels(instance, labels, lo) : cle_explain_labels(instance, labels, lo);
    }
    rep.parameters["top_labels"] = o.top_labels;
    ordered_json arr = ordered_json::array();
    for (const Explanation& e : exps) {
      const std::string suffix = std::to_string(e.label);
      run.image("bars-" + suffix + ".ppm",
                render_bars(e.method == "cle" ? e.singleton_projection : e.weights, e.method + " " + e.class_name));
      if (extra_weights) extra_weights(suffix, e);
      arr.push_back(to_json(e));
    }
    rep.explanation["explanations"] = std::move(arr);
  } else if (o.method == "shap") {
    ShapOptions so;
    so.exact = o.exact;
    so.num_samples = o.samples.value_or(2048);
    so.seed = seed;
    so.top_k = o.top_k;
    rep.parameters["exact"] = o.exact;
    const int label = o.target_class.value_or(predicted_label(instance));
    const Explanation e = kernel_shap_explain(instance, label, so);
    run.image("bars-" + std::to_string(label) + ".ppm", render_bars(e.weights, "shap " + e.class_name));
    if (extra_weights) extra_weights(std::to_string(label), e);
    rep.explanation["explanations"] = ordered_json::array({to_json(e)});
  } else {
    AnchorOptions ao;
    ao.seed = seed;
    if (o.samples) ao.samples_per_candidate = *o.samples;
    rep.parameters["precision_target"] = ao.precision_target;
    rep.parameters["delta"] = ao.delta;
    rep.parameters["beam_width"] = ao.beam_width;
    const int label = o.target_class.value_or(predicted_label(instance));
    const AnchorResult r = anchors_explain(instance, label, ao);
    if (extra_anchor) extra_anchor(r);
    rep.explanation["anchor"] = to_json(r);
  }
}

int explain_image(const Options& o, std::uint64_t seed, std::ostream& out) {
  const Network net = load_network(o.model);
  const Tensor image = read_image(o.input);
  if (image.shape() != net.input_shape()) {
    throw Error(ErrorCode::kImageShapeMismatch, "input image " + shape_to_string(image.shape()) +
                                                    " does not match the model input " +
                                                    shape_to_string(net.input_shape()));
  }
  Run run("explain-image", o, seed);
  auto& rep = run.report();
  rep.inputs = {{"model", o.model}, {"input", o.input}};
  const RenderSpec spec{parse_colormap(o.colormap), o.alpha};
  rep.parameters["colormap"] = o.colormap;
  rep.parameters["alpha"] = o.alpha;

  auto emit_map = [&](const SaliencyMap& map) {
    run.image("map.pgm", grayscale(map));
    run.image("heatmap.ppm", colorize(map, spec.colormap));
    run.image("overlay.ppm", overlay(image, map, spec));
    rep.explanation["map"] = to_json(map);
  };

  const std::string& m = o.method;
  if (m == "gradcam" || m == "gradcampp" || m == "scorecam") {
    CamRequest req;
    req.method = m == "gradcam" ? CamMethod::kGradCam : m == "gradcampp" ? CamMethod::kGradCamPlusPlus : CamMethod::kScoreCam;
    req.target_layer = o.target_layer.empty() ? default_cam_layer(net) : o.target_layer;
    req.target_class = o.target_class;
    rep.parameters["target_layer"] = req.target_layer;
    const CamResult r = class_activation_map(net, image, req);
    rep.explanation["target_class"] = r.target_class;
    rep.explanation["channel_weights"] = r.channel_weights;
    emit_map(r.map);
  } else if (m == "vanilla" || m == "guided" || m == "smoothgrad" || m == "ig") {
    const int target = o.target_class.value_or(predicted_class(net, image));
    BackpropResult r;
    if (m == "vanilla") {
      r = vanilla_bp(net, image, target);
    } else if (m == "guided") {
      r = guided_bp(net, image, target);
    } else if (m == "smoothgrad") {
      SmoothGradOptions so{o.samples.value_or(50), o.sigma, seed};
      rep.parameters["samples"] = so.samples;
      rep.parameters["sigma"] = so.sigma;
      r = smooth_grad(net, image, target, so);
    } else {
      rep.parameters["steps"] = o.steps;
      rep.parameters["baseline"] = "zeros";
      const Tensor baseline(image.shape());
      r = integrated_gradients(net, image, baseline, o.steps, target);
      double total = 0.0;
      for (float v : r.raw.data()) total += v;
      const double diff = ForwardPass(net, image).logits()[static_cast<std::size_t>(target)] -
                          ForwardPass(net, baseline).logits()[static_cast<std::size_t>(target)];
      rep.explanation["attribution_sum"] = total;
      rep.explanation["score_difference"] = diff;
    }
    rep.explanation["target_class"] = target;
    emit_map(r.map);
  } else {
    const auto [rows, cols] = parse_grid(o.grid);
    rep.parameters["grid"] = o.grid;
    const ImageInstance instance(network_predictor(net), image, grid_segment(image.dim(1), image.dim(2), rows, cols));
    auto segment_map = [&](const std::vector<FeatureWeight>& weights) {
      std::vector<float> per_segment(static_cast<std::size_t>(instance.dimension()), 0.0f);
      for (const auto& w : weights) per_segment[static_cast<std::size_t>(w.feature)] = static_cast<float>(w.weight);
      std::vector<float> px(instance.segments().labels.size());
      for (std::size_t p = 0; p < px.size(); ++p) px[p] = per_segment[static_cast<std::size_t>(instance.segments().labels[p])];
      return make_saliency(image.dim(1), image.dim(2), std::move(px), Signedness::kSigned);
    };
    run_perturbation(
        run, o, seed, instance,
        [&](const std::string& suffix, const Explanation& e) {
          run.image("overlay-" + suffix + ".ppm",
                    overlay(image, segment_map(e.method == "cle" ? e.singleton_projection : e.weights), spec));
        },
        [&](const AnchorResult& r) {
          Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(instance.dimension());
          for (const auto& p : r.predicates) z[p.feature] = 1.0;
          run.image(image.dim(0) == 1 ? "anchor.pgm" : "anchor.ppm", instance.reconstruct(z));
        });
  }
  run.finish(out);
  return kExitOk;
}

std::string read_text_input(const Options& o) {
  if (!o.text.empty()) return o.text;
  if (o.input.empty()) throw UsageError("explain-text needs --text or --input");
  std::ifstream in(o.input);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + o.input);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(l);
  }
  const int n = o.line.value_or(1);
  if (n < 1 || n > static_cast<int>(lines.size())) {
    throw Error(ErrorCode::kInvalidArgument, "--line " + std::to_string(n) + " outside 1.." + std::to_string(lines.size()));
  }
  return lines[static_cast<std::size_t>(n - 1)];
}

int explain_text(const Options& o, std::uint64_t seed, std::ostream& out) {
  const BowTextClassifier model = load_bow_model(o.model);
  const std::string text = read_text_input(o);
  const TextInstance instance(model.as_predictor(), text);
  Run run("explain-text", o, seed);
  run.report().inputs = {{"model", o.model}, {"text", text}};
  if (!o.input.empty()) run.report().inputs["input"] = o.input;
  run_perturbation(run, o, seed, instance, nullptr, nullptr);
  run.finish(out);
  return kExitOk;
}

int explain_tabular(const Options& o, std::uint64_t seed, std::ostream& out) {
  const LinearTabularModel model = load_linear_tabular_model(o.model);
  auto data = std::make_shared<const Dataset>(ingest_csv(o.data, model.csv_hints()));
  if (!model.feature_names.empty() && model.feature_names != data->schema().feature_names) {
    throw Error(ErrorCode::kSchemaError, "CSV header does not match the model's feature names");
  }
  if (o.row < 0 || o.row >= data->num_rows()) {
    throw Error(ErrorCode::kInvalidArgument,
                "--row " + std::to_string(o.row) + " outside 0.." + std::to_string(data->num_rows() - 1));
  }
  const TabularInstance instance(model.predictor(), data, data->row(o.row), o.discretize);
  Run run("explain-tabular", o, seed);
  run.report().inputs = {{"model", o.model}, {"data", o.data}, {"row", o.row}};
  run.report().parameters["discretize"] = o.discretize;
  run_perturbation(run, o, seed, instance, nullptr, nullptr);
  run.finish(out);
  return kExitOk;
}

int global_run(const Options& o, std::uint64_t seed, std::ostream& out) {
  const Network net = load_network(o.model);
  std::optional<Tensor> image;
  if (!o.input.empty()) image = read_image(o.input);
  const std::string& m = o.method;
  if ((m == "deepdream" || m == "inverted") && !image) throw UsageError("--method " + m + " needs --input IMAGE");
  if ((m == "filter" || m == "layer" || m == "deepdream" || m == "inverted") && o.target_layer.empty()) {
    throw UsageError("--method " + m + " needs --target-layer NAME");
  }

  OptimizationConfig cfg;
  OptimizationTrace trace;
  if (m == "inverted") {
    cfg = default_inversion_config(o.target_layer);
  } else if (m == "logit") {
    cfg = default_ascent_config({TargetKind::kLogit, "", o.target_class.value_or(0)});
  } else if (m == "layer") {
    cfg = default_ascent_config({TargetKind::kLayer, o.target_layer, 0});
  } else {
    cfg = default_ascent_config({TargetKind::kFilter, o.target_layer, o.target_filter.value_or(0)});
  }
  cfg.seed = seed;
  cfg.num_iter = o.num_iter;
  if (o.lr) cfg.learning_rate = *o.lr;
  if (o.decay) cfg.l2_decay = *o.decay;
  if (o.tv) cfg.tv_weight = *o.tv;
  if (o.jitter) cfg.jitter = *o.jitter;

  if (m == "inverted") {
    trace = invert_features(net, *image, o.target_layer, cfg);
  } else if (m == "deepdream") {
    trace = deep_dream(net, *image, o.target_layer, o.target_filter.value_or(0), cfg);
    cfg.init = *image;
  } else {
    if (image) cfg.init = *image;
    trace = maximize_activation(net, cfg);
  }

  Run run("global", o, seed);
  auto& rep = run.report();
  rep.inputs = {{"model", o.model}};
  if (image) rep.inputs["input"] = o.input;
  rep.parameters = to_json(trace, cfg)["config"];
  run.image(trace.image.dim(0) == 1 ? "result.pgm" : "result.ppm", trace.image);
  const ordered_json trace_json = to_json(trace, cfg);
  run.text_file("trace.json", trace_json.dump(2) + "\n");
  rep.explanation = trace_json;
  run.finish(out);
  return kExitOk;
}

int make_model(const Options& o, std::uint64_t seed, std::ostream& out) {
  const Network net = o.kind == "quadrant" ? build_quadrant_planted_cnn(seed) : build_reference_cnn(seed);
  save_network(net, o.out);
  out << o.out << "\n";
  return kExitOk;
}

void add_common(CLI::App* sub, Options& o, const std::vector<std::string>& methods) {
  std::string choices;
  for (const auto& m : methods) choices += (choices.empty() ? "" : "|") + m;
  sub->add_option("--method", o.method, "One of " + choices)->required()->check(CLI::IsMember(methods));
  sub->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "Output directory (default out/<timestamp>-<method>)");
  sub->add_option("--seed", o.seed, "Random seed (falls back to PERCEPT_SEED, then 0)");
  sub->add_option("--class", o.target_class, "Class to explain (default: predicted)");
}

void add_perturbation(CLI::App* sub, Options& o) {
  sub->add_option("--top-labels", o.top_labels, "LIME/CLE: explain the N most probable classes")
      ->check(CLI::PositiveNumber);
  sub->add_option("--samples", o.samples, "Perturbation samples")->check(CLI::PositiveNumber);
  sub->add_option("--top-k", o.top_k, "Features kept per explanation")->check(CLI::PositiveNumber);
  sub->add_flag("--exact", o.exact, "SHAP: enumerate every coalition");
}

}  // namespace

std::span<const MethodInfo> method_registry() { return kMethods; }

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"percept: post-hoc interpretation of image, text and tabular models", "percept"};
  app.require_subcommand(1);
  Options o;

  auto* img = app.add_subcommand("explain-image", "Saliency, CAM and perturbation explanations of an image");
  add_common(img, o, methods_for("explain-image"));
  add_perturbation(img, o);
  img->add_option("--input", o.input, "PGM/PPM image")->required()->check(CLI::ExistingFile);
  img->add_option("--target-layer", o.target_layer, "CAM layer (default: last spatial layer)");
  img->add_option("--grid", o.grid, "Perturbation segments as ROWSxCOLS");
  img->add_option("--sigma", o.sigma, "SmoothGrad noise level");
  img->add_option("--steps", o.steps, "Integrated-gradients steps")->check(CLI::PositiveNumber);
  img->add_option("--colormap", o.colormap, "jet|gray")->check(CLI::IsMember({"jet", "gray"}));
  img->add_option("--alpha", o.alpha, "Overlay opacity")->check(CLI::Range(0.0, 1.0));

  auto* txt = app.add_subcommand("explain-text", "Perturbation explanations of a text classifier");
  add_common(txt, o, methods_for("explain-text"));
  add_perturbation(txt, o);
  txt->add_option("--text", o.text, "Text to explain");
  txt->add_option("--input", o.input, "Text file, one instance per line")->check(CLI::ExistingFile);
  txt->add_option("--line", o.line, "1-based line of --input")->check(CLI::PositiveNumber);

  auto* tab = app.add_subcommand("explain-tabular", "Perturbation explanations of a tabular classifier");
  add_common(tab, o, methods_for("explain-tabular"));
  add_perturbation(tab, o);
  tab->add_option("--data", o.data, "CSV with a header row")->required()->check(CLI::ExistingFile);
  tab->add_option("--row", o.row, "0-based data row to explain");
  tab->add_flag("--discretize", o.discretize, "Perturb continuous columns by quartile bin");

  auto* glob = app.add_subcommand("global", "Activation maximization, deep dream and feature inversion");
  add_common(glob, o, methods_for("global"));
  glob->add_option("--target-layer", o.target_layer, "Layer to visualize or invert");
  glob->add_option("--target-filter", o.target_filter, "Channel for filter/deepdream");
  glob->add_option("--num-iter", o.num_iter, "Optimization steps")->check(CLI::PositiveNumber);
  glob->add_option("--input", o.input, "Start image (deepdream) or target image (inverted)")->check(CLI::ExistingFile);
  glob->add_option("--lr", o.lr, "Step size (default pinned per mode)")->check(CLI::NonNegativeNumber);
  glob->add_option("--decay", o.decay, "L2 decay weight")->check(CLI::NonNegativeNumber);
  glob->add_option("--tv", o.tv, "Total-variation weight (inverted)")->check(CLI::NonNegativeNumber);
  glob->add_option("--jitter", o.jitter, "Max roll in pixels per step")->check(CLI::NonNegativeNumber);

  auto* mk = app.add_subcommand("make-model", "Write a built-in network as a weight file");
  mk->add_option("--kind", o.kind, "reference|quadrant")->check(CLI::IsMember({"reference", "quadrant"}));
  mk->add_option("--seed", o.seed, "Weight seed (default 7)");
  mk->add_option("--output", o.out, "Weight file to write")->required();

  auto* list = app.add_subcommand("methods", "List every method and the subcommands that accept it");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (list->parsed()) {
      for (const auto& m : kMethods) out << m.name << "\t" << m.algorithm << "\t" << m.subcommands << "\n";
      return kExitOk;
    }
    if (mk->parsed()) {
      Options mo = o;
      return make_model(mo, o.seed.value_or(7), out);
    }
    const std::uint64_t seed = resolve_seed(o);
    if (img->parsed()) return explain_image(o, seed, out);
    if (txt->parsed()) return explain_text(o, seed, out);
    if (tab->parsed()) return explain_tabular(o, seed, out);
    return global_run(o, seed, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace percept
