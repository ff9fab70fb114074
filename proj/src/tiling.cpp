#include "cloudnet/tiling.hpp"

#include <regex>

namespace cloudnet {

PatchGrid PatchGrid::make(Index scene_h, Index scene_w, Index patch_size, std::string scene_id) {
  if (scene_h < 1 || scene_w < 1 || patch_size < 1) {
    throw Error(Errc::DimensionMismatch, "grid needs positive scene and patch sizes");
  }
  PatchGrid g;
  g.scene_id = std::move(scene_id);
  g.scene_h = scene_h;
  g.scene_w = scene_w;
  g.patch_size = patch_size;
  g.rows = (scene_h + patch_size - 1) / patch_size;
  g.cols = (scene_w + patch_size - 1) / patch_size;
  g.pad_bottom = g.rows * patch_size - scene_h;
  g.pad_right = g.cols * patch_size - scene_w;
  return g;
}

std::string patch_name(Index row, Index col, const std::string& scene_id) {
  return "patch_" + std::to_string(row) + "_" + std::to_string(col) + "_" + scene_id;
}

std::optional<PatchName> parse_patch_name(const std::string& name) {
  static const std::regex pattern(R"(patch_(\d+)_(\d+)_(.+))");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) return std::nullopt;
  return PatchName{std::stoll(m[1]), std::stoll(m[2]), m[3]};
}

std::pair<PatchGrid, std::vector<RawPatch>> cut_patches(const SpectralScene& scene, Index patch_size) {
  validate_scene(scene);
  PatchGrid grid = PatchGrid::make(scene.height(), scene.width(), patch_size, scene.scene_id);
  std::vector<RawPatch> patches(std::size_t(grid.patch_count()));
  for (int b = 0; b < kBandCount; ++b) {
    auto tiles = cut_raster(scene.bands[b], grid);
    for (std::size_t i = 0; i < tiles.size(); ++i) {
      patches[i].row = tiles[i].row;
      patches[i].col = tiles[i].col;
      patches[i].bands[b] = std::move(tiles[i].pixels);
    }
  }
  return {std::move(grid), std::move(patches)};
}

}  // namespace cloudnet
