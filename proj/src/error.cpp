#include "bukhgeim/error.hpp"

namespace bukhgeim {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OddGridSize: return "OddGridSize";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::SupportOutsideGrid: return "SupportOutsideGrid";
    case ErrorCode::SupportAtFrame: return "SupportAtFrame";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::VanishingConductivity: return "VanishingConductivity";
    case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorCode::NonDecayingSolution: return "NonDecayingSolution";
    case ErrorCode::NotContractive: return "NotContractive";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::ExponentialOverflow: return "ExponentialOverflow";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ContourTooTight: return "ContourTooTight";
    case ErrorCode::SupportNotCovered: return "SupportNotCovered";
    case ErrorCode::PartialDataset: return "PartialDataset";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "UnknownError";
}

}  // namespace bukhgeim
