#include "shield/error.hpp"

namespace shield {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Asymmetric: return "Asymmetric";
    case ErrorCode::NotInside: return "NotInside";
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::NoNormalAvailable: return "NoNormalAvailable";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::NonAffineH: return "NonAffineH";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::PlantDiverged: return "PlantDiverged";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace shield
