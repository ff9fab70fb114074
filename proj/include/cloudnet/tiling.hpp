#pragma once

#include "cloudnet/error.hpp"
#include "cloudnet/raster.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace cloudnet {

inline constexpr Index kPatchSize = 384;
inline constexpr Index kModelInputSide = 192;

/// Non-overlapping grid over a zero-padded scene.
struct PatchGrid {
  std::string scene_id;
  Index scene_h = 0;
  Index scene_w = 0;
  Index patch_size = kPatchSize;
  Index rows = 0;
  Index cols = 0;
  Index pad_bottom = 0;
  Index pad_right = 0;

  static PatchGrid make(Index scene_h, Index scene_w, Index patch_size = kPatchSize,
                        std::string scene_id = {});
  Index patch_count() const { return rows * cols; }
};

template <typename T>
struct Tile {
  Index row = 0;
  Index col = 0;
  Raster<T> pixels;
};

/// `patch_<row>_<col>_<scene_id>`
std::string patch_name(Index row, Index col, const std::string& scene_id);

struct PatchName {
  Index row = 0;
  Index col = 0;
  std::string scene_id;
};
std::optional<PatchName> parse_patch_name(const std::string& name);

/// Tile (r, c) holds source pixels [r*S, (r+1)*S) x [c*S, (c+1)*S); cells past
/// the source edge are zero.
template <typename T>
std::vector<Tile<T>> cut_raster(const Raster<T>& src, const PatchGrid& grid) {
  if (src.rows() != grid.scene_h || src.cols() != grid.scene_w) {
    throw Error(Errc::ShapeMismatch, "raster does not match patch grid");
  }
  const Index s = grid.patch_size;
  std::vector<Tile<T>> tiles;
  tiles.reserve(std::size_t(grid.patch_count()));
  for (Index r = 0; r < grid.rows; ++r) {
    for (Index c = 0; c < grid.cols; ++c) {
      Tile<T> t{r, c, Raster<T>::Zero(s, s)};
      const Index h = std::min(s, grid.scene_h - r * s);
      const Index w = std::min(s, grid.scene_w - c * s);
      t.pixels.topLeftCorner(h, w) = src.block(r * s, c * s, h, w);
      tiles.push_back(std::move(t));
    }
  }
  return tiles;
}

/// Inverse of cut_raster: places each tile by its grid coordinates and crops the padding.
template <typename T>
Raster<T> stitch_tiles(const PatchGrid& grid, const std::vector<Tile<T>>& tiles) {
  const Index s = grid.patch_size;
  std::vector<char> seen(std::size_t(grid.patch_count()), 0);
  Raster<T> padded(grid.rows * s, grid.cols * s);
  for (const auto& t : tiles) {
    if (t.row < 0 || t.row >= grid.rows || t.col < 0 || t.col >= grid.cols) {
      throw Error(Errc::ShapeMismatch, "tile (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                                           ") lies outside the grid");
    }
    if (t.pixels.rows() != s || t.pixels.cols() != s) {
      throw Error(Errc::ShapeMismatch, "tile side " + std::to_string(t.pixels.rows()) + "x" +
                                           std::to_string(t.pixels.cols()) + ", expected " +
                                           std::to_string(s));
    }
    auto& flag = seen[std::size_t(t.row * grid.cols + t.col)];
    if (flag) {
      throw Error(Errc::DuplicatePatch,
                  "tile (" + std::to_string(t.row) + "," + std::to_string(t.col) + ") supplied twice");
    }
    flag = 1;
    padded.block(t.row * s, t.col * s, s, s) = t.pixels;
  }
  for (Index i = 0; i < grid.patch_count(); ++i) {
    if (!seen[std::size_t(i)]) {
      throw Error(Errc::MissingPatch, "tile (" + std::to_string(i / grid.cols) + "," +
                                          std::to_string(i % grid.cols) + ") missing");
    }
  }
  return padded.topLeftCorner(grid.scene_h, grid.scene_w);
}

/// Raw 16-bit patch straight out of cut_patches.
struct RawPatch {
  Index row = 0;
  Index col = 0;
  std::array<BandRaster, kBandCount> bands;
};

std::pair<PatchGrid, std::vector<RawPatch>> cut_patches(const SpectralScene& scene,
                                                        Index patch_size = kPatchSize);

template <typename Scalar>
struct SpectralPatch {
  Index row = 0;
  Index col = 0;
  std::array<Raster<Scalar>, kBandCount> bands;

  Index side() const { return bands[0].rows(); }
};

enum class MaskKind { Probability, Binary };
enum class Resample { Bilinear, Nearest };

template <typename Scalar>
struct MaskPatch {
  Index row = 0;
  Index col = 0;
  MaskKind kind = MaskKind::Probability;
  Raster<Scalar> values;

  Index side() const { return values.rows(); }
};

/// Divides by the full 16-bit range.
template <typename Scalar>
SpectralPatch<Scalar> normalize(const RawPatch& raw) {
  SpectralPatch<Scalar> out;
  out.row = raw.row;
  out.col = raw.col;
  for (int b = 0; b < kBandCount; ++b) {
    out.bands[b] = raw.bands[b].template cast<Scalar>() / Scalar(65535);
  }
  return out;
}

/// Half-pixel-centred resampling, as in common image libraries.
template <typename Scalar>
Raster<Scalar> resize_raster(const Raster<Scalar>& src, Index out_h, Index out_w, Resample method) {
  if (src.size() == 0 || out_h < 1 || out_w < 1) {
    throw Error(Errc::ShapeMismatch, "resize needs positive source and target sizes");
  }
  const Index in_h = src.rows();
  const Index in_w = src.cols();
  if (in_h == out_h && in_w == out_w) return src;
  Raster<Scalar> out(out_h, out_w);

  if (method == Resample::Nearest) {
    for (Index y = 0; y < out_h; ++y) {
      const Index sy = std::min((2 * y + 1) * in_h / (2 * out_h), in_h - 1);
      for (Index x = 0; x < out_w; ++x) {
        const Index sx = std::min((2 * x + 1) * in_w / (2 * out_w), in_w - 1);
        out(y, x) = src(sy, sx);
      }
    }
    return out;
  }

  struct Tap {
    Index i0, i1;
    double f;
  };
  auto taps = [](Index in, Index n_out) {
    std::vector<Tap> t(static_cast<std::size_t>(n_out));
    const double scale = double(in) / double(n_out);
    for (Index d = 0; d < n_out; ++d) {
      const double s = std::clamp((double(d) + 0.5) * scale - 0.5, 0.0, double(in - 1));
      const Index i0 = static_cast<Index>(std::floor(s));
      t[std::size_t(d)] = {i0, std::min(i0 + 1, in - 1), s - double(i0)};
    }
    return t;
  };
  const auto ty = taps(in_h, out_h);
  const auto tx = taps(in_w, out_w);
  for (Index y = 0; y < out_h; ++y) {
    const auto& a = ty[std::size_t(y)];
    const Scalar fy = Scalar(a.f);
    for (Index x = 0; x < out_w; ++x) {
      const auto& b = tx[std::size_t(x)];
      const Scalar fx = Scalar(b.f);
      // a + f*(b - a) keeps constant regions exact.
      const Scalar top = src(a.i0, b.i0) + fx * (src(a.i0, b.i1) - src(a.i0, b.i0));
      const Scalar bot = src(a.i1, b.i0) + fx * (src(a.i1, b.i1) - src(a.i1, b.i0));
      out(y, x) = top + fy * (bot - top);
    }
  }
  return out;
}

template <typename Scalar>
SpectralPatch<Scalar> resize_patch(const SpectralPatch<Scalar>& patch, Index target,
                                   Resample method = Resample::Bilinear) {
  SpectralPatch<Scalar> out;
  out.row = patch.row;
  out.col = patch.col;
  for (int b = 0; b < kBandCount; ++b) out.bands[b] = resize_raster(patch.bands[b], target, target, method);
  return out;
}

template <typename Scalar>
MaskPatch<Scalar> resize_patch(const MaskPatch<Scalar>& patch, Index target, Resample method) {
  if (patch.kind == MaskKind::Binary && method != Resample::Nearest) {
    throw Error(Errc::InvalidMethod, "binary masks must be resized with nearest-neighbour sampling");
  }
  return {patch.row, patch.col, patch.kind, resize_raster(patch.values, target, target, method)};
}

template <typename Scalar>
Raster<Scalar> stitch(const PatchGrid& grid, const std::vector<MaskPatch<Scalar>>& patches) {
  std::vector<Tile<Scalar>> tiles;
  tiles.reserve(patches.size());
  for (const auto& p : patches) tiles.push_back({p.row, p.col, p.values});
  return stitch_tiles(grid, tiles);
}

}  // namespace cloudnet
