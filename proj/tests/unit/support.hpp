#pragma once

#include "cloudnet/raster.hpp"

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace cloudnet::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cloudnet_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline BinaryMask random_mask(Index h, Index w, std::mt19937_64& rng, double p = 0.5) {
  std::bernoulli_distribution d(p);
  BinaryMask m(h, w);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng) ? 1 : 0;
  return m;
}

inline BandRaster random_band(Index h, Index w, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 65535);
  BandRaster b(h, w);
  for (Index i = 0; i < b.size(); ++i) b.data()[i] = std::uint16_t(d(rng));
  return b;
}

inline SpectralScene random_scene(Index h, Index w, std::mt19937_64& rng, std::string id = "scene") {
  SpectralScene s;
  s.scene_id = std::move(id);
  for (auto& b : s.bands) b = random_band(h, w, rng);
  return s;
}

}  // namespace cloudnet::test
