#pragma once

#include "cloudnet/raster.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cloudnet {

namespace fs = std::filesystem;

// Single-channel TIFF I/O. Readers accept 8/16-bit unsigned samples and
// widen or check ranges as required by the target type.
BandRaster read_band_tiff(const fs::path& path);
BinaryMask read_mask_tiff(const fs::path& path);
void write_band_tiff(const fs::path& path, const BandRaster& raster);
void write_mask_tiff(const fs::path& path, const BinaryMask& raster);
/// 32-bit float rasters, used for optional probability-map output.
void write_float_tiff(const fs::path& path, const Raster<float>& raster);
Raster<float> read_float_tiff(const fs::path& path);

/// Loads four band files given in blue, green, red, nir order.
SpectralScene load_scene(const std::vector<fs::path>& band_paths, std::string scene_id = {});
/// Writes the four bands of a scene to the given paths (blue, green, red, nir).
void write_scene(const SpectralScene& scene, const std::array<fs::path, kBandCount>& band_paths);

/// Any nonzero source value becomes 1.
GroundTruthMask load_gt(const fs::path& path, const SpectralScene& scene);

enum class Split { Train, Test };
std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct ManifestEntry {
  std::string scene_id;
  std::array<fs::path, kBandCount> bands;
  std::optional<fs::path> gt;
};

struct DatasetManifest {
  Split split = Split::Train;
  std::vector<ManifestEntry> entries;
  std::size_t patch_count = 0;
};

/// Path of `<root>/<split>/<band>/<band>_<id>.TIF`.
fs::path layout_path(const fs::path& root, Split split, std::string_view band, std::string_view id);

/// Scans `<root>/<split>/{blue,green,red,nir,gt}/` and returns one entry per
/// identifier, sorted by identifier. An absent `<root>/<split>` yields an
/// empty manifest; an absent band directory next to populated ones is a
/// LayoutError.
DatasetManifest build_manifest(const fs::path& root, Split split);

void write_manifest_csv(const fs::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest_csv(const fs::path& path, Split split);

}  // namespace cloudnet
