#pragma once

#include "cloudnet/error.hpp"
#include "cloudnet/tiling.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace cloudnet {

struct AugmentationPolicy {
  double flip_probability = 0.5;
  std::vector<int> rotation_choices{0, 90, 180, 270};
  double zoom_min = 1.0;
  double zoom_max = 1.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Independent stream for one sample in one epoch.
std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t sample);

struct GeometricDraw {
  bool flip = false;
  int quarter_turns = 0;  // counter-clockwise
  double zoom = 1.0;
};

/// Always consumes the same number of variates, whatever the policy.
GeometricDraw draw_transform(const AugmentationPolicy& policy, std::mt19937_64& rng);

template <typename T>
Raster<T> flip_horizontal(const Raster<T>& src) {
  return src.rowwise().reverse();
}

/// Counter-clockwise: out(r, c) = in(c, n-1-r) for one quarter turn.
template <typename T>
Raster<T> rotate_quarter_turns(const Raster<T>& src, int turns) {
  turns = ((turns % 4) + 4) % 4;
  switch (turns) {
    case 1: return src.transpose().colwise().reverse();
    case 2: return src.reverse();
    case 3: return src.transpose().rowwise().reverse();
    default: return src;
  }
}

/// Scale by `zoom` about the centre, then crop back to the original size.
template <typename T>
Raster<T> zoom_center(const Raster<T>& src, double zoom, Resample method) {
  if (zoom == 1.0) return src;
  const Index h = src.rows();
  const Index w = src.cols();
  Raster<T> out(h, w);
  auto source_coord = [zoom](Index d, Index n) {
    return (double(d) + 0.5 - double(n) / 2.0) / zoom + double(n) / 2.0 - 0.5;
  };
  for (Index y = 0; y < h; ++y) {
    const double sy = std::clamp(source_coord(y, h), 0.0, double(h - 1));
    for (Index x = 0; x < w; ++x) {
      const double sx = std::clamp(source_coord(x, w), 0.0, double(w - 1));
      if (method == Resample::Nearest) {
        out(y, x) = src(Index(std::floor(sy + 0.5)), Index(std::floor(sx + 0.5)));
      } else {
        const Index y0 = Index(std::floor(sy)), x0 = Index(std::floor(sx));
        const Index y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
        const T fy = T(sy - double(y0)), fx = T(sx - double(x0));
        const T top = src(y0, x0) + fx * (src(y0, x1) - src(y0, x0));
        const T bot = src(y1, x0) + fx * (src(y1, x1) - src(y1, x0));
        out(y, x) = top + fy * (bot - top);
      }
    }
  }
  return out;
}

template <typename T>
Raster<T> apply_transform(const Raster<T>& src, const GeometricDraw& draw, Resample method) {
  Raster<T> out = draw.flip ? flip_horizontal(src) : src;
  out = rotate_quarter_turns(out, draw.quarter_turns);
  return zoom_center(out, draw.zoom, method);
}

/// Applies one sampled geometric transform to both the patch and its mask.
template <typename Scalar>
std::pair<SpectralPatch<Scalar>, MaskPatch<Scalar>> augment_pair(const SpectralPatch<Scalar>& patch,
                                                                  const MaskPatch<Scalar>& mask,
                                                                  const AugmentationPolicy& policy,
                                                                  std::mt19937_64& rng) {
  if (mask.kind != MaskKind::Binary) throw Error(Errc::DomainError, "augmentation expects a binary mask");
  for (const auto& band : patch.bands) {
    if (band.rows() != mask.values.rows() || band.cols() != mask.values.cols()) {
      throw Error(Errc::ShapeMismatch, "patch and mask differ in spatial size");
    }
  }
  const GeometricDraw draw = draw_transform(policy, rng);
  std::pair<SpectralPatch<Scalar>, MaskPatch<Scalar>> out{patch, mask};
  for (auto& band : out.first.bands) band = apply_transform(band, draw, Resample::Bilinear);
  out.second.values = apply_transform(mask.values, draw, Resample::Nearest);
  return out;
}

}  // namespace cloudnet
