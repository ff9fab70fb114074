#include "cloudnet/synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>

namespace cloudnet {

namespace {

double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

Index pick(std::mt19937_64& rng, Index lo, Index hi) {  // inclusive
  return lo + std::min(hi - lo, Index(unit(rng) * double(hi - lo + 1)));
}

}  // namespace

std::pair<SpectralScene, BinaryMask> make_synthetic_scene(Index height, Index width, std::uint64_t seed,
                                                          std::string scene_id) {
  std::mt19937_64 rng(seed);
  BinaryMask mask = BinaryMask::Zero(height, width);
  const int clouds = 1 + int(unit(rng) * 3.0);
  for (int c = 0; c < clouds; ++c) {
    const Index h = pick(rng, std::max<Index>(1, height / 8), std::max<Index>(1, height / 3));
    const Index w = pick(rng, std::max<Index>(1, width / 8), std::max<Index>(1, width / 3));
    const Index top = pick(rng, 0, height - h);
    const Index left = pick(rng, 0, width - w);
    mask.block(top, left, h, w).setOnes();
  }

  // Clear-sky and cloud digital numbers per band (blue, green, red, nir).
  constexpr std::array<double, kBandCount> clear{9000, 8000, 7000, 12000};
  constexpr std::array<double, kBandCount> cloud{42000, 41000, 40000, 38000};
  SpectralScene scene;
  scene.scene_id = std::move(scene_id);
  for (int b = 0; b < kBandCount; ++b) {
    scene.bands[b].resize(height, width);
    for (Index y = 0; y < height; ++y) {
      for (Index x = 0; x < width; ++x) {
        const double base = mask(y, x) ? cloud[b] : clear[b];
        const double noise = (unit(rng) - 0.5) * 3000.0;
        scene.bands[b](y, x) = std::uint16_t(std::clamp(base + noise, 0.0, 65535.0));
      }
    }
  }
  return {std::move(scene), std::move(mask)};
}

void write_synthetic_dataset(const std::filesystem::path& root, Split split, int count, Index height, Index width,
                             std::uint64_t seed, const std::string& prefix) {
  for (int i = 0; i < count; ++i) {
    const std::string id = prefix + std::to_string(i);
    auto [scene, mask] = make_synthetic_scene(height, width, seed + std::uint64_t(i) * 7919u, id);
    std::array<fs::path, kBandCount> paths;
    for (int b = 0; b < kBandCount; ++b) paths[b] = layout_path(root, split, kBandNames[b], id);
    write_scene(scene, paths);
    write_mask_tiff(layout_path(root, split, kGtName, id), (mask.array() * std::uint8_t(255)).matrix());
  }
}

}  // namespace cloudnet
