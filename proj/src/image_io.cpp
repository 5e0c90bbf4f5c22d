#include "percept/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "percept/error.hpp"
#include "percept/weights_io.hpp"

namespace percept {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }

  // Skips whitespace and '#' comments.
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw FormatError(start, std::string(what) + " is implausibly large");
      ++pos_;
    }
    if (pos_ == start) throw FormatError(start, std::string("expected ") + what);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError(pos_, "expected a single whitespace byte before the raster");
    }
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Tensor decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError(0, "not a binary PGM (P5) or PPM (P6) file");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader header(bytes.subspan(2));
  const long width = header.number("width");
  const long height = header.number("height");
  const std::size_t maxval_offset = header.offset() + 2;
  const long maxval = header.number("maxval");
  if (width < 1 || height < 1) throw FormatError(2, "image dimensions must be positive");
  if (maxval != 255) {
    throw Error(ErrorCode::kUnsupportedMaxVal,
                "maxval " + std::to_string(maxval) + " at byte " + std::to_string(maxval_offset) +
                    " is not supported (only 255)");
  }
  header.single_space();
  const std::size_t raster = header.offset() + 2;
  const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - raster < expected) {
    throw FormatError(bytes.size(), "raster truncated: expected " + std::to_string(expected) + " bytes, found " +
                                        std::to_string(bytes.size() - raster));
  }
  if (bytes.size() - raster > expected) {
    throw FormatError(raster + expected, "unexpected bytes after the raster");
  }
  Tensor image({channels, static_cast<int>(height), static_cast<int>(width)});
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  for (std::size_t p = 0; p < plane; ++p) {
    for (int c = 0; c < channels; ++c) {
      image[static_cast<std::size_t>(c) * plane + p] = static_cast<float>(bytes[raster + p * channels + c]) / 255.0f;
    }
  }
  return image;
}

std::vector<std::uint8_t> encode_pnm(const Tensor& image) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
    throw Error(ErrorCode::kShapeMismatch,
                "PGM/PPM output needs a [1,H,W] or [3,H,W] tensor, got " + shape_to_string(image.shape()));
  }
  const int channels = image.dim(0), height = image.dim(1), width = image.dim(2);
  const std::string header = std::string(channels == 1 ? "P5" : "P6") + "\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  out.reserve(out.size() + plane * channels);
  for (std::size_t p = 0; p < plane; ++p) {
    for (int c = 0; c < channels; ++c) {
      const float v = std::clamp(image[static_cast<std::size_t>(c) * plane + p], 0.0f, 1.0f);
      out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
    }
  }
  return out;
}

Tensor read_image(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return decode_pnm(bytes);
}

void write_image(const Tensor& image, const std::filesystem::path& path) {
  write_file_bytes(path, encode_pnm(image));
}

Tensor to_rgb(const Tensor& image) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
    throw Error(ErrorCode::kShapeMismatch, "expected a [1,H,W] or [3,H,W] image, got " + shape_to_string(image.shape()));
  }
  if (image.dim(0) == 3) return image;
  const std::size_t plane = image.size();
  std::vector<float> rgb(plane * 3);
  for (int c = 0; c < 3; ++c) std::copy(image.data().begin(), image.data().end(), rgb.begin() + c * plane);
  return Tensor({3, image.dim(1), image.dim(2)}, std::move(rgb));
}

}  // namespace percept
