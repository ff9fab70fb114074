#include "cloudnet/error.hpp"

namespace cloudnet {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingBand: return "MissingBand";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DecodeError: return "DecodeError";
    case Errc::EncodeError: return "EncodeError";
    case Errc::LayoutError: return "LayoutError";
    case Errc::InvalidMethod: return "InvalidMethod";
    case Errc::MissingPatch: return "MissingPatch";
    case Errc::DuplicatePatch: return "DuplicatePatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::ConfigError: return "ConfigError";
    case Errc::DepthError: return "DepthError";
    case Errc::DomainError: return "DomainError";
    case Errc::EmptyBatch: return "EmptyBatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::NonBinaryInput: return "NonBinaryInput";
    case Errc::MissingGT: return "MissingGT";
    case Errc::MissingPrediction: return "MissingPrediction";
    case Errc::CheckpointMismatch: return "CheckpointMismatch";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace cloudnet
