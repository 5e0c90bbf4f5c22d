#include "percept/tensor.hpp"

#include <cmath>
#include <utility>

#include "percept/error.hpp"

namespace percept {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) {
      throw Error(ErrorCode::kShapeMismatch,
                  "dimension sizes must be positive, got " + shape_to_string(shape));
    }
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {
  if (!std::isfinite(fill)) {
    throw Error(ErrorCode::kNumericalError, "tensor fill value is not finite");
  }
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != data_.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "payload of " + std::to_string(data_.size()) +
                    " elements does not match shape " + shape_to_string(shape_));
  }
  check_finite("tensor construction");
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

void Tensor::check_finite(const char* context) const {
  percept::check_finite(data_, context);
}

void check_finite(std::span<const float> values, const char* context) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNumericalError,
                  std::string("non-finite value at element ") +
                      std::to_string(i) + " in " + context);
    }
  }
}

}  // namespace percept
