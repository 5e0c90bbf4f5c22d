#include "percept/saliency.hpp"

#include <algorithm>
#include <cmath>

#include "percept/error.hpp"

namespace percept {

double SaliencyMap::total() const {
  double s = 0.0;
  for (float v : values) s += v;
  return s;
}

double SaliencyMap::region_sum(int y0, int y1, int x0, int x1) const {
  double s = 0.0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) s += at(y, x);
  }
  return s;
}

SaliencyMap make_saliency(int height, int width, std::vector<float> values, Signedness signedness) {
  if (height < 1 || width < 1 || values.size() != static_cast<std::size_t>(height) * width) {
    throw Error(ErrorCode::kShapeMismatch, "saliency map values do not match its size");
  }
  check_finite(values, "saliency map");
  if (signedness == Signedness::kNonnegative) {
    for (float& v : values) v = std::max(v, 0.0f);
  }
  return SaliencyMap{height, width, std::move(values), signedness};
}

std::vector<float> upsample_bilinear(std::span<const float> src, int src_h, int src_w, int dst_h,
                                     int dst_w) {
  if (src.size() != static_cast<std::size_t>(src_h) * src_w || dst_h < 1 || dst_w < 1) {
    throw Error(ErrorCode::kShapeMismatch, "bad upsample geometry");
  }
  const auto coord = [](int dst, int dst_n, int src_n) {
    if (dst_n == 1 || src_n == 1) return 0.0;
    return static_cast<double>(dst) * (src_n - 1) / (dst_n - 1);
  };
  std::vector<float> out(static_cast<std::size_t>(dst_h) * dst_w);
  for (int y = 0; y < dst_h; ++y) {
    const double sy = coord(y, dst_h, src_h);
    const int y0 = std::min(static_cast<int>(std::floor(sy)), src_h - 1);
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double fy = sy - y0;
    for (int x = 0; x < dst_w; ++x) {
      const double sx = coord(x, dst_w, src_w);
      const int x0 = std::min(static_cast<int>(std::floor(sx)), src_w - 1);
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double fx = sx - x0;
      const double a = src[static_cast<std::size_t>(y0) * src_w + x0];
      const double b = src[static_cast<std::size_t>(y0) * src_w + x1];
      const double c = src[static_cast<std::size_t>(y1) * src_w + x0];
      const double d = src[static_cast<std::size_t>(y1) * src_w + x1];
      // Weighted form keeps equal corners exact.
      double v = a;
      if (!(a == b && a == c && a == d)) {
        v = (1 - fy) * ((1 - fx) * a + fx * b) + fy * ((1 - fx) * c + fx * d);
      }
      out[static_cast<std::size_t>(y) * dst_w + x] = static_cast<float>(v);
    }
  }
  return out;
}

std::vector<float> normalize_minmax(std::span<const float> values) {
  std::vector<float> out(values.size(), 0.0f);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!(*hi > *lo)) return out;
  const double range = static_cast<double>(*hi) - *lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<float>((static_cast<double>(values[i]) - *lo) / range);
  }
  return out;
}

SaliencyMap collapse_abs_max(const Tensor& chw, Signedness signedness) {
  if (chw.rank() != 3) throw Error(ErrorCode::kShapeMismatch, "channel collapse expects [C,H,W]");
  const int c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  std::vector<float> out(static_cast<std::size_t>(h) * w, 0.0f);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float& o = out[static_cast<std::size_t>(y) * w + x];
        o = std::max(o, std::abs(chw.at(ch, y, x)));
      }
    }
  }
  return make_saliency(h, w, std::move(out), signedness);
}

}  // namespace percept
