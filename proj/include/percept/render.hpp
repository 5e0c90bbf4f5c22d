#pragma once

#include <string>
#include <vector>

#include "percept/perturbation.hpp"
#include "percept/saliency.hpp"
#include "percept/tensor.hpp"

namespace percept {

enum class Colormap { kJet, kGray };

struct RenderSpec {
  Colormap colormap = Colormap::kJet;
  double alpha = 0.5;  // weight of the colormapped map in the overlay
};

struct Rgb {
  float r = 0.0f, g = 0.0f, b = 0.0f;
};

// t in [0,1]; values outside are clamped.
Rgb colormap_color(Colormap map, double t);

// Min-max normalized map through the colormap, [3,H,W]. Constant maps render
// as the colormap's zero color.
Tensor colorize(const SaliencyMap& map, Colormap colormap);

// Min-max normalized map as a [1,H,W] grayscale image.
Tensor grayscale(const SaliencyMap& map);

// (1 - alpha) * base + alpha * colorize(map), [3,H,W]. A gray base is
// expanded to three channels.
Tensor overlay(const Tensor& base, const SaliencyMap& map, const RenderSpec& spec);

// Horizontal bar chart, one row per weight sorted by |weight| descending.
// Positive bars are green, negative red; the largest |weight| spans the full
// bar area.
Tensor render_bars(const std::vector<FeatureWeight>& weights, const std::string& title = {});

// Draws `text` with the built-in 5x7 font; lowercase letters render as
// uppercase and unknown characters as a box.
void draw_text(Tensor& rgb, int x, int y, const std::string& text, Rgb color);

}  // namespace percept
