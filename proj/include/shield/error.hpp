#pragma once

#include <stdexcept>
#include <string>

namespace shield {

enum class ErrorCode {
  NonFinite,
  DimMismatch,
  IndexOutOfRange,
  InvalidArgument,
  Asymmetric,
  NotInside,
  DegenerateProjection,
  NoNormalAvailable,
  ZeroGradient,
  NonAffineH,
  NoConvergence,
  ParseError,
  ValidationError,
  IoError,
  PlantDiverged,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Throws Error(code, message) when `condition` is false.
inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace shield
