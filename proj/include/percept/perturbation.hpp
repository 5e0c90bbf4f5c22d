#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "percept/dataset.hpp"
#include "percept/models.hpp"
#include "percept/rng.hpp"
#include "percept/tensor.hpp"

namespace percept {

// Image partition into d labelled regions, labels 0..d-1.
struct SegmentMap {
  int height = 0;
  int width = 0;
  int count = 0;
  std::vector<int> labels;

  int at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

// rows x cols grid of near-equal rectangles, labelled in row-major order.
SegmentMap grid_segment(int height, int width, int rows, int cols);

// n x d matrix of Bernoulli(p_keep) bits; row 0 is all ones.
Eigen::MatrixXd sample_masks(int d, int n, std::uint64_t seed, double p_keep = 0.5);

// 1 - cos(z, 1); the empty mask is at distance 1.
double cosine_distance_to_ones(const Eigen::Ref<const Eigen::RowVectorXd>& z);

enum class Modality { kImage, kText, kTabular };

struct PerturbationBatch {
  Eigen::MatrixXd design;     // surrogate regressors, n x d
  Eigen::VectorXd distances;  // distance of each sample to the instance
  ProbMatrix probs;           // n x K from a single predictor call
};

struct AnchorSample {
  Eigen::MatrixXd indicators;  // n x d, 1 where a feature matches the instance
  std::vector<int> labels;     // predicted class of each sample
};

// An instance seen through its interpretable features, bundled with the
// predictor that explains it.
class InterpretableInstance {
 public:
  virtual ~InterpretableInstance() = default;

  virtual Modality modality() const = 0;
  virtual int dimension() const = 0;
  virtual std::string feature_name(int i) const = 0;
  virtual const std::vector<std::string>& class_names() const = 0;
  int num_classes() const { return static_cast<int>(class_names().size()); }
  virtual double default_kernel_width() const = 0;

  // LIME-style neighbourhood; row 0 is the instance itself.
  virtual PerturbationBatch sample(int n, std::uint64_t seed) const = 0;
  // Coalition z_i = 1 keeps feature i as in the instance, 0 replaces it by
  // the modality's baseline. One predictor call.
  virtual ProbMatrix evaluate_coalitions(const Eigen::MatrixXd& z) const = 0;
  // Perturbations in which every feature in `fixed` keeps its instance value.
  virtual AnchorSample sample_anchor(std::span<const int> fixed, int n, Rng& rng) const = 0;
  // Human-readable form of the anchor predicate on feature i.
  virtual std::string predicate_text(int i) const = 0;
};

class ImageInstance final : public InterpretableInstance {
 public:
  // Segments switched off are filled with the per-channel mean of `image`.
  ImageInstance(ImagePredictor predictor, Tensor image, SegmentMap segments);

  Modality modality() const override { return Modality::kImage; }
  int dimension() const override { return segments_.count; }
  std::string feature_name(int i) const override;
  const std::vector<std::string>& class_names() const override { return predictor_.class_names(); }
  double default_kernel_width() const override { return 0.25; }
  PerturbationBatch sample(int n, std::uint64_t seed) const override;
  ProbMatrix evaluate_coalitions(const Eigen::MatrixXd& z) const override;
  AnchorSample sample_anchor(std::span<const int> fixed, int n, Rng& rng) const override;
  std::string predicate_text(int i) const override;

  Tensor reconstruct(const Eigen::Ref<const Eigen::RowVectorXd>& z) const;
  const SegmentMap& segments() const noexcept { return segments_; }
  const Tensor& image() const noexcept { return image_; }

 private:
  ImagePredictor predictor_;
  Tensor image_;
  SegmentMap segments_;
  std::vector<float> fill_;
};

class TextInstance final : public InterpretableInstance {
 public:
  // Features are the distinct lowercase whitespace tokens in first-seen order;
  // switching one off removes every occurrence.
  TextInstance(TextPredictor predictor, std::string text);

  Modality modality() const override { return Modality::kText; }
  int dimension() const override { return static_cast<int>(vocabulary_.size()); }
  std::string feature_name(int i) const override { return vocabulary_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& class_names() const override { return predictor_.class_names(); }
  double default_kernel_width() const override { return 0.25; }
  PerturbationBatch sample(int n, std::uint64_t seed) const override;
  ProbMatrix evaluate_coalitions(const Eigen::MatrixXd& z) const override;
  AnchorSample sample_anchor(std::span<const int> fixed, int n, Rng& rng) const override;
  std::string predicate_text(int i) const override;

  std::string reconstruct(const Eigen::Ref<const Eigen::RowVectorXd>& z) const;
  const std::string& text() const noexcept { return text_; }

 private:
  struct Span {
    std::size_t begin, end;
    int feature;
  };
  TextPredictor predictor_;
  std::string text_;
  std::vector<std::string> vocabulary_;
  std::vector<Span> spans_;
};

struct TabularPerturbation {
  Eigen::MatrixXd rows;        // n x D raw feature values; row 0 is the instance
  Eigen::MatrixXd indicators;  // n x D: same bin/category as the instance (1 for undiscretized continuous)
  Eigen::MatrixXd design;      // surrogate regressors: indicators, or standardized values for undiscretized continuous columns
};

// discretize = true: continuous columns resampled by quartile bin (bin drawn
// from its empirical mass, value uniform inside it); categorical columns drawn
// from their empirical frequencies. discretize = false: continuous columns get
// instance + N(0, column std) noise.
TabularPerturbation perturb_tabular(const TabularRow& row, const Dataset& dataset, int n,
                                    std::uint64_t seed, bool discretize);

class TabularInstance final : public InterpretableInstance {
 public:
  // `shap_baseline` defaults to column means (continuous) and modes
  // (categorical).
  TabularInstance(TabularPredictor predictor, std::shared_ptr<const Dataset> dataset, TabularRow row,
                  bool discretize, std::optional<TabularRow> shap_baseline = std::nullopt);

  Modality modality() const override { return Modality::kTabular; }
  int dimension() const override { return dataset_->num_columns(); }
  std::string feature_name(int i) const override;
  const std::vector<std::string>& class_names() const override { return predictor_.class_names(); }
  double default_kernel_width() const override;
  PerturbationBatch sample(int n, std::uint64_t seed) const override;
  ProbMatrix evaluate_coalitions(const Eigen::MatrixXd& z) const override;
  AnchorSample sample_anchor(std::span<const int> fixed, int n, Rng& rng) const override;
  std::string predicate_text(int i) const override;

  const TabularRow& row() const noexcept { return row_; }
  bool discretize() const noexcept { return discretize_; }

 private:
  TabularPredictor predictor_;
  std::shared_ptr<const Dataset> dataset_;
  TabularRow row_;
  bool discretize_;
  TabularRow shap_baseline_;
};

struct FeatureWeight {
  int feature = 0;
  std::string name;
  double weight = 0.0;
};

struct PairWeight {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

// Signed local explanation of one label.
struct Explanation {
  std::string method;
  int label = 0;
  std::string class_name;
  double intercept = 0.0;
  std::vector<FeatureWeight> weights;
  std::vector<PairWeight> pairs;  // CLE only
  // CLE only: singleton weight plus half of each incident pair weight.
  std::vector<FeatureWeight> singleton_projection;
  double fit_quality = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
  double label_probability = 0.0;  // predictor output on the unperturbed instance
};

struct LimeOptions {
  int num_samples = 1000;
  std::optional<double> kernel_width;  // modality default when unset
  double ridge_lambda = 1.0;
  int top_k = 10;
  std::uint64_t seed = 0;
};

// Ranks by |weight| descending, then feature id ascending, keeps `k`.
std::vector<FeatureWeight> top_k_features(std::vector<FeatureWeight> weights, int k);
// Classes ordered by probability, highest first (ties by index).
std::vector<int> top_labels(const Eigen::Ref<const Eigen::RowVectorXd>& probs, int k);

Explanation lime_explain(const InterpretableInstance& instance, int label, const LimeOptions& options);
// One shared perturbation sample, one explanation per requested label.
std::vector<Explanation> lime_explain_labels(const InterpretableInstance& instance,
                                             std::span<const int> labels, const LimeOptions& options);
// Explains the `top_labels` most probable classes of the instance.
std::vector<Explanation> lime_explain_top(const InterpretableInstance& instance, int top_labels,
                                          const LimeOptions& options);

// LIME with a degree-2 surrogate: the design gains every product z_i z_j.
Explanation cle_explain(const InterpretableInstance& instance, int label, const LimeOptions& options);
std::vector<Explanation> cle_explain_labels(const InterpretableInstance& instance,
                                            std::span<const int> labels, const LimeOptions& options);

// Surrogate fit on a ready-made sample; shared by LIME and CLE.
Explanation fit_local_surrogate(const InterpretableInstance& instance, const PerturbationBatch& batch,
                                int label, double kernel_width, double lambda, int top_k, bool pairs);

}  // namespace percept
