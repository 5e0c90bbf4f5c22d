#include "percept/render.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string_view>

#include "percept/error.hpp"
#include "percept/image_io.hpp"

namespace percept {

namespace {

struct Glyph {
  char ch;
  std::array<std::string_view, 7> rows;
};

// clang-format off
constexpr Glyph kFont[] = {
  {'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
  {'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
  {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
  {'3', {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."}},
  {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
  {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
  {'6', {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
  {'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
  {'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
  {'9', {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
  {'A', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
  {'B', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
  {'C', {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
  {'D', {"###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###.."}},
  {'E', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
  {'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
  {'G', {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"}},
  {'H', {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
  {'I', {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."}},
  {'J', {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
  {'K', {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
  {'L', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
  {'M', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
  {'N', {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"}},
  {'O', {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
  {'P', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
  {'Q', {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"}},
  {'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
  {'S', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
  {'T', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
  {'U', {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
  {'V', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
  {'W', {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."}},
  {'X', {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"}},
  {'Y', {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
  {'Z', {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
  {' ', {".....", ".....", ".....", ".....", ".....", ".....", "....."}},
  {'.', {".....", ".....", ".....", ".....", ".....", ".##..", ".##.."}},
  {',', {".....", ".....", ".....", ".....", ".##..", "..#..", ".#..."}},
  {'-', {".....", ".....", ".....", "#####", ".....", ".....", "....."}},
  {'+', {".....", "..#..", "..#..", "#####", "..#..", "..#..", "....."}},
  {'_', {".....", ".....", ".....", ".....", ".....", ".....", "#####"}},
  {'=', {".....", ".....", "#####", ".....", "#####", ".....", "....."}},
  {'<', {"...#.", "..#..", ".#...", "#....", ".#...", "..#..", "...#."}},
  {'>', {".#...", "..#..", "...#.", "....#", "...#.", "..#..", ".#..."}},
  {':', {".....", ".##..", ".##..", ".....", ".##..", ".##..", "....."}},
  {'\'', {"..#..", "..#..", ".#...", ".....", ".....", ".....", "....."}},
  {'(', {"...#.", "..#..", ".#...", ".#...", ".#...", "..#..", "...#."}},
  {')', {".#...", "..#..", "...#.", "...#.", "...#.", "..#..", ".#..."}},
  {'/', {".....", "....#", "...#.", "..#..", ".#...", "#....", "....."}},
  {'*', {".....", "..#..", "#.#.#", ".###.", "#.#.#", "..#..", "....."}},
  {'?', {".###.", "#...#", "....#", "...#.", "..#..", ".....", "..#.."}},
  {'!', {"..#..", "..#..", "..#..", "..#..", "..#..", ".....", "..#.."}},
};
// clang-format on

constexpr std::array<std::string_view, 7> kUnknownGlyph = {"#####", "#...#", "#...#", "#...#", "#...#", "#...#", "#####"};

const std::array<std::string_view, 7>& glyph_for(char ch) {
  const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (const Glyph& g : kFont) {
    if (g.ch == up) return g.rows;
  }
  return kUnknownGlyph;
}

constexpr int kGlyphAdvance = 6;
constexpr Rgb kGreen{0.0f, 0.6f, 0.0f};
constexpr Rgb kRed{0.8f, 0.0f, 0.0f};
constexpr Rgb kBlack{0.0f, 0.0f, 0.0f};
constexpr Rgb kAxis{0.5f, 0.5f, 0.5f};

void put(Tensor& rgb, int x, int y, Rgb c) {
  if (x < 0 || y < 0 || y >= rgb.dim(1) || x >= rgb.dim(2)) return;
  rgb.at(0, y, x) = c.r;
  rgb.at(1, y, x) = c.g;
  rgb.at(2, y, x) = c.b;
}

void fill_rect(Tensor& rgb, int x0, int y0, int w, int h, Rgb c) {
  for (int y = y0; y < y0 + h; ++y) {
    for (int x = x0; x < x0 + w; ++x) put(rgb, x, y, c);
  }
}

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace

Rgb colormap_color(Colormap map, double t) {
  t = std::clamp(t, 0.0, 1.0);
  if (map == Colormap::kGray) return {clamp01(t), clamp01(t), clamp01(t)};
  return {clamp01(1.5 - std::abs(4.0 * t - 3.0)), clamp01(1.5 - std::abs(4.0 * t - 2.0)),
          clamp01(1.5 - std::abs(4.0 * t - 1.0))};
}

Tensor colorize(const SaliencyMap& map, Colormap colormap) {
  const std::vector<float> norm = normalize_minmax(map.values);
  Tensor out({3, map.height, map.width});
  const std::size_t plane = norm.size();
  for (std::size_t p = 0; p < plane; ++p) {
    const Rgb c = colormap_color(colormap, norm[p]);
    out[p] = c.r;
    out[plane + p] = c.g;
    out[2 * plane + p] = c.b;
  }
  return out;
}

Tensor grayscale(const SaliencyMap& map) {
  return Tensor({1, map.height, map.width}, normalize_minmax(map.values));
}

Tensor overlay(const Tensor& base, const SaliencyMap& map, const RenderSpec& spec) {
  if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "overlay alpha must lie in [0,1]");
  }
  if (base.rank() != 3 || base.dim(1) != map.height || base.dim(2) != map.width) {
    throw Error(ErrorCode::kSizeMismatch, "map is " + std::to_string(map.height) + "x" + std::to_string(map.width) +
                                              " but the base image is " + shape_to_string(base.shape()));
  }
  const Tensor rgb = to_rgb(base);
  const Tensor color = colorize(map, spec.colormap);
  if (spec.alpha == 0.0) return rgb;
  if (spec.alpha == 1.0) return color;
  Tensor out(rgb.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>((1.0 - spec.alpha) * rgb[i] + spec.alpha * color[i]);
  }
  return out;
}

void draw_text(Tensor& rgb, int x, int y, const std::string& text, Rgb color) {
  for (char ch : text) {
    const auto& rows = glyph_for(ch);
    for (int gy = 0; gy < 7; ++gy) {
      for (int gx = 0; gx < 5; ++gx) {
        if (rows[static_cast<std::size_t>(gy)][static_cast<std::size_t>(gx)] == '#') put(rgb, x + gx, y + gy, color);
      }
    }
    x += kGlyphAdvance;
  }
}

Tensor render_bars(const std::vector<FeatureWeight>& weights, const std::string& title) {
  constexpr int kMargin = 6, kRowHeight = 14, kBarArea = 240, kMaxLabelChars = 28;
  std::vector<FeatureWeight> sorted = top_k_features(weights, -1);
  std::size_t label_chars = 1;
  for (const auto& w : sorted) label_chars = std::max(label_chars, std::min<std::size_t>(w.name.size(), kMaxLabelChars));
  const int label_width = static_cast<int>(label_chars) * kGlyphAdvance;
  const int title_height = title.empty() ? 0 : kRowHeight;
  const int width = kMargin + label_width + kMargin + kBarArea + kMargin;
  const int height = kMargin + title_height + std::max<int>(1, static_cast<int>(sorted.size())) * kRowHeight + kMargin;

  Tensor img({3, height, width}, 1.0f);
  if (!title.empty()) draw_text(img, kMargin, kMargin + 3, title, kBlack);
  double max_abs = 0.0;
  for (const auto& w : sorted) max_abs = std::max(max_abs, std::abs(w.weight));
  const int bar_x = kMargin + label_width + kMargin;
  fill_rect(img, bar_x - 1, kMargin + title_height, 1, height - 2 * kMargin - title_height, kAxis);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const int row_y = kMargin + title_height + static_cast<int>(i) * kRowHeight;
    std::string label = sorted[i].name.substr(0, kMaxLabelChars);
    draw_text(img, kMargin, row_y + 3, label, kBlack);
    const double frac = max_abs > 0.0 ? std::abs(sorted[i].weight) / max_abs : 0.0;
    const int len = static_cast<int>(std::lround(frac * kBarArea));
    fill_rect(img, bar_x, row_y + 2, len, kRowHeight - 4, sorted[i].weight >= 0.0 ? kGreen : kRed);
  }
  return img;
}

}  // namespace percept
