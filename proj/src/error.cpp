#include "percept/error.hpp"

namespace percept {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kUnknownLayerName: return "UnknownLayerName";
    case ErrorCode::kInvalidTarget: return "InvalidTarget";
    case ErrorCode::kNonSpatialLayer: return "NonSpatialLayer";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kUnsupportedMaxVal: return "UnsupportedMaxVal";
    case ErrorCode::kNumericalError: return "NumericalError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInconsistentArity: return "InconsistentArity";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInvalidGrid: return "InvalidGrid";
    case ErrorCode::kDegenerateDesign: return "DegenerateDesign";
    case ErrorCode::kDesignTooLarge: return "DesignTooLarge";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kTooManyFeaturesForExact: return "TooManyFeaturesForExact";
    case ErrorCode::kPredictorFailure: return "PredictorFailure";
    case ErrorCode::kFilterIndexOutOfRange: return "FilterIndexOutOfRange";
    case ErrorCode::kImageShapeMismatch: return "ImageShapeMismatch";
    case ErrorCode::kZeroTargetActivation: return "ZeroTargetActivation";
    case ErrorCode::kSizeMismatch: return "SizeMismatch";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

FormatError::FormatError(std::size_t offset, const std::string& message)
    : Error(ErrorCode::kFormatError,
            message + " (at byte offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

ParseError::ParseError(std::size_t row, std::size_t column,
                       const std::string& message)
    : Error(ErrorCode::kParseError, "row " + std::to_string(row) + ", column " +
                                        std::to_string(column) + ": " + message),
      row_(row),
      column_(column) {}

}  // namespace percept
