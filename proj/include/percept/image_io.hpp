#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "percept/tensor.hpp"

namespace percept {

enum class ImageFormat { kPgm, kPpm };

// Binary PGM (P5) or PPM (P6) with maxval 255 -> [C,H,W] in [0,1], C = 1 or 3.
Tensor decode_pnm(std::span<const std::uint8_t> bytes);

// [1,H,W] -> P5, [3,H,W] -> P6. Values are clamped to [0,1] and rounded to
// the nearest of 256 levels.
std::vector<std::uint8_t> encode_pnm(const Tensor& image);

Tensor read_image(const std::filesystem::path& path);
void write_image(const Tensor& image, const std::filesystem::path& path);

// Expands a one-channel image to three channels; three-channel input passes through.
Tensor to_rgb(const Tensor& image);

}  // namespace percept
