#include "cloudnet/augment.hpp"

namespace cloudnet {

void AugmentationPolicy::validate() const {
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw Error(Errc::ConfigError, "flip_probability must lie in [0, 1]");
  }
  if (rotation_choices.empty()) throw Error(Errc::ConfigError, "rotation_choices must not be empty");
  for (int deg : rotation_choices) {
    if (deg != 0 && deg != 90 && deg != 180 && deg != 270) {
      throw Error(Errc::ConfigError, "rotations are limited to 0, 90, 180 and 270 degrees");
    }
  }
  if (!(zoom_min >= 1.0) || zoom_max < zoom_min) {
    throw Error(Errc::ConfigError, "zoom range must satisfy 1 <= min <= max");
  }
}

std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t sample) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(epoch),
                    std::uint32_t(epoch >> 32), std::uint32_t(sample), std::uint32_t(sample >> 32)};
  return std::mt19937_64(seq);
}

namespace {
// 53-bit uniform on [0, 1), independent of the standard library's distribution code.
double unit_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }
}  // namespace

GeometricDraw draw_transform(const AugmentationPolicy& policy, std::mt19937_64& rng) {
  const double u_flip = unit_uniform(rng);
  const double u_rot = unit_uniform(rng);
  const double u_zoom = unit_uniform(rng);

  GeometricDraw d;
  d.flip = u_flip < policy.flip_probability;
  const auto n = policy.rotation_choices.size();
  const auto pick = std::min(n - 1, std::size_t(u_rot * double(n)));
  d.quarter_turns = policy.rotation_choices[pick] / 90;
  d.zoom = policy.zoom_min + (policy.zoom_max - policy.zoom_min) * u_zoom;
  return d;
}

}  // namespace cloudnet
