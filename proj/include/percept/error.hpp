#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace percept {

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kUnknownLayerName,
  kInvalidTarget,
  kNonSpatialLayer,
  kFormatError,
  kUnsupportedVersion,
  kUnsupportedMaxVal,
  kNumericalError,
  kParseError,
  kInconsistentArity,
  kSchemaError,
  kEmptyDataset,
  kInvalidGrid,
  kDegenerateDesign,
  kDesignTooLarge,
  kSingularSystem,
  kTooManyFeaturesForExact,
  kPredictorFailure,
  kFilterIndexOutOfRange,
  kImageShapeMismatch,
  kZeroTargetActivation,
  kSizeMismatch,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Base of every error raised by the library. The code identifies the failure
// class; the message is meant for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Malformed binary input. `offset` is the byte position where decoding failed.
class FormatError : public Error {
 public:
  FormatError(std::size_t offset, const std::string& message);

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Malformed CSV input. Rows and columns are 1-based as a spreadsheet shows them
// (row 1 is the header).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& message);

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace percept
