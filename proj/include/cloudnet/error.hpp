#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cloudnet {

enum class Errc {
  MissingBand,
  DimensionMismatch,
  DecodeError,
  EncodeError,
  LayoutError,
  InvalidMethod,
  MissingPatch,
  DuplicatePatch,
  ShapeMismatch,
  ConfigError,
  DepthError,
  DomainError,
  EmptyBatch,
  EmptyDataset,
  NonFiniteLoss,
  NonFiniteGradient,
  NonBinaryInput,
  MissingGT,
  MissingPrediction,
  CheckpointMismatch,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-status mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cloudnet
