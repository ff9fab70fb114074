#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace cloudnet {

using Index = Eigen::Index;

/// Row-major 2-D raster; (row, col) with a top-left origin.
template <typename T>
using Raster = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using BandRaster = Raster<std::uint16_t>;
using BinaryMask = Raster<std::uint8_t>;

/// Landsat 8 bands 2..5, in the canonical channel order used everywhere.
enum class Band : int { Blue = 0, Green = 1, Red = 2, Nir = 3 };

inline constexpr int kBandCount = 4;
inline constexpr std::array<std::string_view, kBandCount> kBandNames{"blue", "green", "red", "nir"};
inline constexpr std::string_view kGtName = "gt";

struct SpectralScene {
  std::string scene_id;
  std::array<BandRaster, kBandCount> bands;

  Index height() const { return bands[0].rows(); }
  Index width() const { return bands[0].cols(); }
  const BandRaster& band(Band b) const { return bands[static_cast<int>(b)]; }
};

struct GroundTruthMask {
  std::string scene_id;
  BinaryMask mask;
};

/// Throws DimensionMismatch / DomainError when the scene breaks its invariants.
void validate_scene(const SpectralScene& scene);

template <typename T>
bool is_binary(const Eigen::DenseBase<T>& m) {
  using S = typename T::Scalar;
  return ((m.derived().array() == S(0)) || (m.derived().array() == S(1))).all();
}

}  // namespace cloudnet
