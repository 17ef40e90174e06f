#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wishart_cone {

enum class ErrorCode {
  NotSymmetric,
  NotPsd,
  NotOrthogonal,
  DimensionError,
  InvalidDimension,
  NonFinite,
  InvalidArgument,
  TrivialParameter,
  NonExistent,
  EmptyBatch,
  ShapeNotHalfInteger,
  ShapeTooSmall,
  RankNotOne,
  ParseError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TrivialParameter: return "TrivialParameter";
    case ErrorCode::NonExistent: return "NonExistent";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::ShapeNotHalfInteger: return "ShapeNotHalfInteger";
    case ErrorCode::ShapeTooSmall: return "ShapeTooSmall";
    case ErrorCode::RankNotOne: return "RankNotOne";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wishart_cone
