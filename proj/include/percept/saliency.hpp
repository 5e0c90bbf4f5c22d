#pragma once

#include <span>
#include <vector>

#include "percept/tensor.hpp"

namespace percept {

enum class Signedness { kSigned, kNonnegative };

// H x W attribution grid. Nonnegative maps (the CAM family) never hold a
// negative value.
struct SaliencyMap {
  int height = 0;
  int width = 0;
  std::vector<float> values;
  Signedness signedness = Signedness::kSigned;

  float at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double total() const;
  // Sum over rows [y0, y1) and columns [x0, x1).
  double region_sum(int y0, int y1, int x0, int x1) const;
};

SaliencyMap make_saliency(int height, int width, std::vector<float> values, Signedness signedness);

// Bilinear resize with corner-aligned sampling: output corners coincide with
// input corners. Constant inputs stay exactly constant.
std::vector<float> upsample_bilinear(std::span<const float> src, int src_h, int src_w, int dst_h,
                                     int dst_w);

// Min-max to [0,1]; an all-equal input maps to all zeros.
std::vector<float> normalize_minmax(std::span<const float> values);

// Max over channels of |value| for a [C,H,W] tensor.
SaliencyMap collapse_abs_max(const Tensor& chw, Signedness signedness = Signedness::kSigned);

}  // namespace percept
