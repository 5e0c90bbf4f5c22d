#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "percept/network.hpp"
#include "percept/saliency.hpp"

namespace percept {

enum class CamMethod { kGradCam, kGradCamPlusPlus, kScoreCam };

struct CamRequest {
  CamMethod method = CamMethod::kGradCam;
  std::string target_layer;
  std::optional<int> target_class;  // argmax of the logits when unset
  // Score differentiated by Grad-CAM / Grad-CAM++. Score-CAM always uses the
  // softmax probability.
  ScoreKind score = ScoreKind::kLogit;
};

struct CamResult {
  SaliencyMap map;  // input resolution, nonnegative
  int target_class = 0;
  // alpha_k for Grad-CAM / Grad-CAM++, probability gain w_k for Score-CAM.
  std::vector<double> channel_weights;
  // ReLU(sum_k weight_k A^k) before upsampling.
  SaliencyMap layer_map;
};

CamResult grad_cam(const Network& net, const Tensor& input, const CamRequest& req);
CamResult grad_cam_pp(const Network& net, const Tensor& input, const CamRequest& req);
CamResult score_cam(const Network& net, const Tensor& input, const CamRequest& req);
// Dispatches on req.method.
CamResult class_activation_map(const Network& net, const Tensor& input, const CamRequest& req);

struct BackpropResult {
  SaliencyMap map;  // max over channels of |raw|
  Tensor raw;       // signed per-pixel gradient or attribution
  int target_class = 0;
  // Integrated gradients only: running sum of attributions after each step.
  std::vector<double> step_partial_sums;
};

BackpropResult vanilla_bp(const Network& net, const Tensor& input, int target,
                          ScoreKind score = ScoreKind::kLogit);
BackpropResult guided_bp(const Network& net, const Tensor& input, int target,
                         ScoreKind score = ScoreKind::kLogit);

struct SmoothGradOptions {
  int samples = 50;
  // Noise std as a fraction of the input's value range.
  double sigma = 0.15;
  std::uint64_t seed = 0;
};

// Mean vanilla gradient over noisy copies of the input.
BackpropResult smooth_grad(const Network& net, const Tensor& input, int target,
                           const SmoothGradOptions& options, ScoreKind score = ScoreKind::kLogit);

// Midpoint-rule path integral from baseline to input.
BackpropResult integrated_gradients(const Network& net, const Tensor& input, const Tensor& baseline,
                                    int steps, int target, ScoreKind score = ScoreKind::kLogit);

int predicted_class(const Network& net, const Tensor& input);

}  // namespace percept
