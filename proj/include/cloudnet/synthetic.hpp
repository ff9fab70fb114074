#pragma once

#include "cloudnet/raster.hpp"
#include "cloudnet/raster_io.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

namespace cloudnet {

/// Noisy clear-sky background with one to three bright rectangular "clouds".
/// Deterministic in (height, width, seed).
std::pair<SpectralScene, BinaryMask> make_synthetic_scene(Index height, Index width, std::uint64_t seed,
                                                          std::string scene_id);

/// Writes `count` synthetic scenes into `<root>/<split>/{blue,green,red,nir,gt}/`
/// (ground truth in {0,255}); scene ids are `<prefix><index>`.
void write_synthetic_dataset(const std::filesystem::path& root, Split split, int count, Index height, Index width,
                             std::uint64_t seed, const std::string& prefix = "synth");

}  // namespace cloudnet
