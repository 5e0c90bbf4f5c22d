#include "percept/perturbation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "percept/error.hpp"
#include "percept/surrogate.hpp"

namespace percept {

SegmentMap grid_segment(int height, int width, int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2 || rows > height || cols > width) {
    throw Error(ErrorCode::kInvalidGrid, std::to_string(rows) + "x" + std::to_string(cols) +
                                             " grid does not fit a " + std::to_string(height) + "x" +
                                             std::to_string(width) + " image (need at least two cells)");
  }
  SegmentMap seg{height, width, rows * cols, std::vector<int>(static_cast<std::size_t>(height) * width)};
  for (int y = 0; y < height; ++y) {
    const int band_y = y * rows / height;
    for (int x = 0; x < width; ++x) {
      seg.labels[static_cast<std::size_t>(y) * width + x] = band_y * cols + x * cols / width;
    }
  }
  return seg;
}

Eigen::MatrixXd sample_masks(int d, int n, std::uint64_t seed, double p_keep) {
  if (d < 1 || n < 1) throw Error(ErrorCode::kInvalidArgument, "mask sampler needs d >= 1 and n >= 1");
  if (!(p_keep >= 0.0 && p_keep <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "p_keep must lie in [0,1]");
  Eigen::MatrixXd z(n, d);
  z.row(0).setOnes();
  Rng rng(seed);
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < d; ++j) z(i, j) = rng.bernoulli(p_keep) ? 1.0 : 0.0;
  }
  return z;
}

double cosine_distance_to_ones(const Eigen::Ref<const Eigen::RowVectorXd>& z) {
  const double norm = z.norm();
  if (norm == 0.0) return 1.0;
  return 1.0 - z.sum() / (norm * std::sqrt(static_cast<double>(z.size())));
}

namespace {

Eigen::VectorXd cosine_distances(const Eigen::MatrixXd& z) {
  Eigen::VectorXd d(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) d[i] = cosine_distance_to_ones(z.row(i));
  return d;
}

std::vector<int> argmax_rows(const ProbMatrix& probs) {
  std::vector<int> labels(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index arg = 0;
    probs.row(i).maxCoeff(&arg);
    labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return labels;
}

Eigen::MatrixXd anchor_masks(int d, std::span<const int> fixed, int n, Rng& rng) {
  Eigen::MatrixXd z(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    for (int f : fixed) z(i, f) = 1.0;
  }
  return z;
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- image

ImageInstance::ImageInstance(ImagePredictor predictor, Tensor image, SegmentMap segments)
    : predictor_(std::move(predictor)), image_(std::move(image)), segments_(std::move(segments)) {
  if (image_.rank() != 3 || image_.dim(1) != segments_.height || image_.dim(2) != segments_.width) {
    throw Error(ErrorCode::kShapeMismatch, "segment map does not match image " + shape_to_string(image_.shape()));
  }
  const std::size_t plane = static_cast<std::size_t>(segments_.height) * segments_.width;
  for (int c = 0; c < image_.dim(0); ++c) {
    double s = 0.0;
    for (std::size_t p = 0; p < plane; ++p) s += image_[static_cast<std::size_t>(c) * plane + p];
    fill_.push_back(static_cast<float>(s / static_cast<double>(plane)));
  }
}

std::string ImageInstance::feature_name(int i) const { return "segment " + std::to_string(i); }

std::string ImageInstance::predicate_text(int i) const { return "segment " + std::to_string(i) + " kept"; }

Tensor ImageInstance::reconstruct(const Eigen::Ref<const Eigen::RowVectorXd>& z) const {
  Tensor out = image_;
  const std::size_t plane = static_cast<std::size_t>(segments_.height) * segments_.width;
  for (std::size_t p = 0; p < plane; ++p) {
    if (z[segments_.labels[p]] != 0.0) continue;
    for (int c = 0; c < image_.dim(0); ++c) out[static_cast<std::size_t>(c) * plane + p] = fill_[static_cast<std::size_t>(c)];
  }
  return out;
}

ProbMatrix ImageInstance::evaluate_coalitions(const Eigen::MatrixXd& z) const {
  std::vector<Tensor> inputs;
  inputs.reserve(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) inputs.push_back(reconstruct(z.row(i)));
  return predictor_.predict_proba(inputs);
}

PerturbationBatch ImageInstance::sample(int n, std::uint64_t seed) const {
  PerturbationBatch batch;
  batch.design = sample_masks(dimension(), n, seed);
  batch.distances = cosine_distances(batch.design);
  batch.probs = evaluate_coalitions(batch.design);
  return batch;
}

AnchorSample ImageInstance::sample_anchor(std::span<const int> fixed, int n, Rng& rng) const {
  AnchorSample s;
  s.indicators = anchor_masks(dimension(), fixed, n, rng);
  s.labels = argmax_rows(evaluate_coalitions(s.indicators));
  return s;
}

// ---------------------------------------------------------------- text

TextInstance::TextInstance(TextPredictor predictor, std::string text)
    : predictor_(std::move(predictor)), text_(std::move(text)) {
  std::size_t i = 0;
  while (i < text_.size()) {
    if (std::isspace(static_cast<unsigned char>(text_[i]))) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < text_.size() && !std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
    std::string token = text_.substr(begin, i - begin);
    for (auto& ch : token) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    auto it = std::find(vocabulary_.begin(), vocabulary_.end(), token);
    if (it == vocabulary_.end()) {
      vocabulary_.push_back(token);
      it = vocabulary_.end() - 1;
    }
    spans_.push_back({begin, i, static_cast<int>(it - vocabulary_.begin())});
  }
  if (vocabulary_.empty()) throw Error(ErrorCode::kInvalidArgument, "text has no tokens to explain");
}

std::string TextInstance::predicate_text(int i) const {
  return "token '" + feature_name(i) + "' present";
}

std::string TextInstance::reconstruct(const Eigen::Ref<const Eigen::RowVectorXd>& z) const {
  std::string out;
  out.reserve(text_.size());
  std::size_t cursor = 0;
  for (const Span& s : spans_) {
    if (z[s.feature] != 0.0) continue;
    out.append(text_, cursor, s.begin - cursor);
    cursor = s.end;
  }
  out.append(text_, cursor, std::string::npos);
  return out;
}

ProbMatrix TextInstance::evaluate_coalitions(const Eigen::MatrixXd& z) const {
  std::vector<std::string> texts;
  texts.reserve(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) texts.push_back(reconstruct(z.row(i)));
  return predictor_.predict_proba(texts);
}

PerturbationBatch TextInstance::sample(int n, std::uint64_t seed) const {
  PerturbationBatch batch;
  batch.design = sample_masks(dimension(), n, seed);
  batch.distances = cosine_distances(batch.design);
  batch.probs = evaluate_coalitions(batch.design);
  return batch;
}

AnchorSample TextInstance::sample_anchor(std::span<const int> fixed, int n, Rng& rng) const {
  AnchorSample s;
  s.indicators = anchor_masks(dimension(), fixed, n, rng);
  s.labels = argmax_rows(evaluate_coalitions(s.indicators));
  return s;
}

// ---------------------------------------------------------------- tabular

namespace {

struct BinBounds {
  double lo, hi;
};

BinBounds bin_bounds(const ColumnStats& s, int bin) {
  const double lo = bin == 0 ? s.min : s.quartiles[static_cast<std::size_t>(bin - 1)];
  const double hi = bin == 3 ? s.max : s.quartiles[static_cast<std::size_t>(bin)];
  return {std::min(lo, hi), std::max(lo, hi)};
}

int draw_index(const std::vector<double>& masses, Rng& rng) {
  const double u = rng.uniform() * std::accumulate(masses.begin(), masses.end(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    acc += masses[i];
    if (u < acc) return static_cast<int>(i);
  }
  // rounding at the top end: last bin with mass
  for (std::size_t i = masses.size(); i-- > 0;) {
    if (masses[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

// Draws one column value from the discretized distribution, optionally held
// inside the instance's bin/category.
double draw_discretized(const Dataset& data, int col, double instance_value, bool hold, Rng& rng) {
  const ColumnStats& s = data.stats(col);
  if (data.schema().is_categorical(col)) {
    return hold ? instance_value : static_cast<double>(draw_index(s.frequencies, rng));
  }
  const int bin = hold ? quartile_bin(s.quartiles, instance_value) : draw_index(s.bin_frequencies, rng);
  const BinBounds b = bin_bounds(s, bin);
  return rng.uniform(b.lo, b.hi);
}

double matches_instance(const Dataset& data, int col, double instance_value, double value) {
  if (data.schema().is_categorical(col)) return value == instance_value ? 1.0 : 0.0;
  const auto& q = data.stats(col).quartiles;
  return quartile_bin(q, value) == quartile_bin(q, instance_value) ? 1.0 : 0.0;
}

void check_row(const TabularRow& row, const Dataset& data) {
  if (static_cast<int>(row.size()) != data.num_columns()) {
    throw Error(ErrorCode::kShapeMismatch, "instance has " + std::to_string(row.size()) +
                                               " features, dataset has " + std::to_string(data.num_columns()));
  }
}

}  // namespace

TabularPerturbation perturb_tabular(const TabularRow& row, const Dataset& dataset, int n, std::uint64_t seed,
                                    bool discretize) {
  if (dataset.num_rows() == 0) throw Error(ErrorCode::kEmptyDataset, "cannot perturb against an empty dataset");
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one perturbation");
  check_row(row, dataset);
  const int d = dataset.num_columns();
  TabularPerturbation out{Eigen::MatrixXd(n, d), Eigen::MatrixXd(n, d), Eigen::MatrixXd(n, d)};
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const double x0 = row[static_cast<std::size_t>(j)];
      const ColumnStats& s = dataset.stats(j);
      const bool categorical = dataset.schema().is_categorical(j);
      double v = x0;
      if (i > 0) {
        if (discretize || categorical) {
          v = draw_discretized(dataset, j, x0, false, rng);
        } else {
          v = x0 + s.stddev * rng.normal();
        }
      }
      out.rows(i, j) = v;
      if (discretize || categorical) {
        out.indicators(i, j) = matches_instance(dataset, j, x0, v);
        out.design(i, j) = out.indicators(i, j);
      } else {
        out.indicators(i, j) = 1.0;
        out.design(i, j) = s.stddev > 0.0 ? (v - s.mean) / s.stddev : 0.0;
      }
    }
  }
  return out;
}

TabularInstance::TabularInstance(TabularPredictor predictor, std::shared_ptr<const Dataset> dataset, TabularRow row,
                                 bool discretize, std::optional<TabularRow> shap_baseline)
    : predictor_(std::move(predictor)), dataset_(std::move(dataset)), row_(std::move(row)), discretize_(discretize) {
  if (!dataset_) throw Error(ErrorCode::kEmptyDataset, "tabular instance needs a dataset");
  check_row(row_, *dataset_);
  if (shap_baseline) {
    check_row(*shap_baseline, *dataset_);
    shap_baseline_ = std::move(*shap_baseline);
  } else {
    for (int j = 0; j < dataset_->num_columns(); ++j) {
      const ColumnStats& s = dataset_->stats(j);
      if (dataset_->schema().is_categorical(j)) {
        shap_baseline_.push_back(static_cast<double>(
            std::max_element(s.frequencies.begin(), s.frequencies.end()) - s.frequencies.begin()));
      } else {
        shap_baseline_.push_back(s.mean);
      }
    }
  }
}

double TabularInstance::default_kernel_width() const {
  return std::sqrt(static_cast<double>(dimension())) * 0.75;
}

std::string TabularInstance::feature_name(int i) const {
  const auto& schema = dataset_->schema();
  const std::string& name = schema.feature_names.at(static_cast<std::size_t>(i));
  const double x0 = row_[static_cast<std::size_t>(i)];
  if (schema.is_categorical(i)) {
    return name + "=" + schema.categorical_names.at(i).at(static_cast<std::size_t>(x0));
  }
  if (!discretize_) return name;
  const auto& q = dataset_->stats(i).quartiles;
  const int bin = quartile_bin(q, x0);
  if (bin == 0) return name + " <= " + format_value(q[0]);
  if (bin == 3) return name + " > " + format_value(q[2]);
  return format_value(q[static_cast<std::size_t>(bin - 1)]) + " < " + name + " <= " +
         format_value(q[static_cast<std::size_t>(bin)]);
}

std::string TabularInstance::predicate_text(int i) const {
  const auto& schema = dataset_->schema();
  if (schema.is_categorical(i)) return feature_name(i);
  // Anchors always reason about quartile bins.
  const std::string& name = schema.feature_names.at(static_cast<std::size_t>(i));
  const auto& q = dataset_->stats(i).quartiles;
  const int bin = quartile_bin(q, row_[static_cast<std::size_t>(i)]);
  if (bin == 0) return name + " <= " + format_value(q[0]);
  if (bin == 3) return name + " > " + format_value(q[2]);
  return format_value(q[static_cast<std::size_t>(bin - 1)]) + " < " + name + " <= " +
         format_value(q[static_cast<std::size_t>(bin)]);
}

PerturbationBatch TabularInstance::sample(int n, std::uint64_t seed) const {
  TabularPerturbation p = perturb_tabular(row_, *dataset_, n, seed, discretize_);
  PerturbationBatch batch;
  batch.design = std::move(p.design);
  batch.distances.resize(n);
  std::vector<TabularRow> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double sq = 0.0;
    for (int j = 0; j < dimension(); ++j) {
      const double x0 = row_[static_cast<std::size_t>(j)];
      const double v = p.rows(i, j);
      if (dataset_->schema().is_categorical(j)) {
        sq += v == x0 ? 0.0 : 1.0;
      } else if (const double sd = dataset_->stats(j).stddev; sd > 0.0) {
        sq += ((v - x0) / sd) * ((v - x0) / sd);
      }
    }
    batch.distances[i] = std::sqrt(sq);
    const auto r = p.rows.row(i);
    rows[static_cast<std::size_t>(i)].assign(r.begin(), r.end());
  }
  batch.probs = predictor_.predict_proba(rows);
  return batch;
}

ProbMatrix TabularInstance::evaluate_coalitions(const Eigen::MatrixXd& z) const {
  std::vector<TabularRow> rows(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    r.resize(row_.size());
    for (std::size_t j = 0; j < row_.size(); ++j) {
      r[j] = z(i, static_cast<Eigen::Index>(j)) != 0.0 ? row_[j] : shap_baseline_[j];
    }
  }
  return predictor_.predict_proba(rows);
}

AnchorSample TabularInstance::sample_anchor(std::span<const int> fixed, int n, Rng& rng) const {
  const int d = dimension();
  std::vector<bool> hold(static_cast<std::size_t>(d), false);
  for (int f : fixed) hold.at(static_cast<std::size_t>(f)) = true;
  AnchorSample s;
  s.indicators.resize(n, d);
  std::vector<TabularRow> rows(static_cast<std::size_t>(n), TabularRow(static_cast<std::size_t>(d)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const double x0 = row_[static_cast<std::size_t>(j)];
      const double v = draw_discretized(*dataset_, j, x0, hold[static_cast<std::size_t>(j)], rng);
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
      s.indicators(i, j) = matches_instance(*dataset_, j, x0, v);
    }
  }
  s.labels = argmax_rows(predictor_.predict_proba(rows));
  return s;
}

// ---------------------------------------------------------------- LIME / CLE

std::vector<FeatureWeight> top_k_features(std::vector<FeatureWeight> weights, int k) {
  std::stable_sort(weights.begin(), weights.end(), [](const FeatureWeight& a, const FeatureWeight& b) {
    const double aa = std::abs(a.weight), bb = std::abs(b.weight);
    if (aa != bb) return aa > bb;
    return a.feature < b.feature;
  });
  if (k >= 0 && static_cast<std::size_t>(k) < weights.size()) weights.resize(static_cast<std::size_t>(k));
  return weights;
}

std::vector<int> top_labels(const Eigen::Ref<const Eigen::RowVectorXd>& probs, int k) {
  std::vector<int> idx(static_cast<std::size_t>(probs.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return probs[a] > probs[b]; });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(std::max(k, 0))));
  return idx;
}

Explanation fit_local_surrogate(const InterpretableInstance& instance, const PerturbationBatch& batch, int label,
                                double kernel_width, double lambda, int top_k, bool pairs) {
  const int d = instance.dimension();
  const auto n = static_cast<int>(batch.design.rows());
  if (label < 0 || label >= instance.num_classes()) {
    throw Error(ErrorCode::kInvalidTarget, "label " + std::to_string(label) + " outside the predictor's classes");
  }
  if (!(kernel_width > 0.0)) throw Error(ErrorCode::kInvalidArgument, "kernel width must be positive");
  bool degenerate = true;
  for (int i = 1; i < n && degenerate; ++i) degenerate = batch.design.row(i) == batch.design.row(0);
  if (degenerate) throw Error(ErrorCode::kDegenerateDesign, "every perturbation sample is identical");

  Eigen::MatrixXd x = batch.design;
  std::vector<std::pair<int, int>> pair_index;
  if (pairs) {
    const long long params = static_cast<long long>(d) * (d + 1) / 2;
    if (params > n) {
      throw Error(ErrorCode::kDesignTooLarge, std::to_string(params) + " surrogate terms exceed " +
                                                  std::to_string(n) + " samples");
    }
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) pair_index.emplace_back(i, j);
    }
    x.conservativeResize(Eigen::NoChange, d + static_cast<Eigen::Index>(pair_index.size()));
    for (std::size_t p = 0; p < pair_index.size(); ++p) {
      x.col(d + static_cast<Eigen::Index>(p)) =
          batch.design.col(pair_index[p].first).cwiseProduct(batch.design.col(pair_index[p].second));
    }
  }
  const Eigen::VectorXd kernel =
      (-(batch.distances.array().square()) / (kernel_width * kernel_width)).exp().matrix();
  const Eigen::VectorXd y = batch.probs.col(label);
  const RidgeFit fit = weighted_ridge(x, y, kernel, lambda);

  Explanation e;
  e.label = label;
  e.class_name = instance.class_names().at(static_cast<std::size_t>(label));
  e.intercept = fit.intercept;
  e.fit_quality = fit.r2;
  e.n_samples = n;
  e.label_probability = batch.probs(0, label);
  std::vector<FeatureWeight> singles;
  for (int i = 0; i < d; ++i) singles.push_back({i, instance.feature_name(i), fit.coefficients[i]});
  e.weights = top_k_features(singles, top_k);
  if (pairs) {
    std::vector<FeatureWeight> projection = singles;
    for (std::size_t p = 0; p < pair_index.size(); ++p) {
      const double w = fit.coefficients[d + static_cast<Eigen::Index>(p)];
      e.pairs.push_back({pair_index[p].first, pair_index[p].second, w});
      projection[static_cast<std::size_t>(pair_index[p].first)].weight += 0.5 * w;
      projection[static_cast<std::size_t>(pair_index[p].second)].weight += 0.5 * w;
    }
    std::stable_sort(e.pairs.begin(), e.pairs.end(), [](const PairWeight& a, const PairWeight& b) {
      return std::abs(a.weight) > std::abs(b.weight);
    });
    e.singleton_projection = top_k_features(std::move(projection), top_k);
  }
  return e;
}

namespace {

PerturbationBatch draw_batch(const InterpretableInstance& instance, const LimeOptions& options) {
  if (options.num_samples < instance.dimension() + 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least d + 2 = " + std::to_string(instance.dimension() + 2) +
                                                 " samples, got " + std::to_string(options.num_samples));
  }
  if (!(options.ridge_lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "ridge lambda must be >= 0");
  return instance.sample(options.num_samples, options.seed);
}

std::vector<Explanation> explain_labels(const InterpretableInstance& instance, const PerturbationBatch& batch,
                                        std::span<const int> labels, const LimeOptions& options, bool pairs) {
  const double width = options.kernel_width.value_or(instance.default_kernel_width());
  std::vector<Explanation> out;
  for (int label : labels) {
    Explanation e = fit_local_surrogate(instance, batch, label, width, options.ridge_lambda, options.top_k, pairs);
    e.method = pairs ? "cle" : "lime";
    e.seed = options.seed;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

std::vector<Explanation> lime_explain_labels(const InterpretableInstance& instance, std::span<const int> labels,
                                             const LimeOptions& options) {
  return explain_labels(instance, draw_batch(instance, options), labels, options, false);
}

Explanation lime_explain(const InterpretableInstance& instance, int label, const LimeOptions& options) {
  const int labels[1] = {label};
  return lime_explain_labels(instance, labels, options).front();
}

std::vector<Explanation> lime_explain_top(const InterpretableInstance& instance, int top_labels_count,
                                          const LimeOptions& options) {
  const PerturbationBatch batch = draw_batch(instance, options);
  const std::vector<int> labels = top_labels(batch.probs.row(0), top_labels_count);
  return explain_labels(instance, batch, labels, options, false);
}

std::vector<Explanation> cle_explain_labels(const InterpretableInstance& instance, std::span<const int> labels,
                                            const LimeOptions& options) {
  const long long params = static_cast<long long>(instance.dimension()) * (instance.dimension() + 1) / 2;
  if (params > options.num_samples) {
    throw Error(ErrorCode::kDesignTooLarge, std::to_string(params) + " surrogate terms exceed " +
                                                std::to_string(options.num_samples) + " samples");
  }
  return explain_labels(instance, draw_batch(instance, options), labels, options, true);
}

Explanation cle_explain(const InterpretableInstance& instance, int label, const LimeOptions& options) {
  const int labels[1] = {label};
  return cle_explain_labels(instance, labels, options).front();
}

}  // namespace percept
