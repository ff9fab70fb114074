#pragma once

#include "cloudnet/error.hpp"
#include "cloudnet/model.hpp"
#include "cloudnet/tiling.hpp"

#include <optional>
#include <vector>

namespace cloudnet {

inline constexpr double kCloudThreshold = 0.047;

struct InferenceConfig {
  double threshold = kCloudThreshold;
  Index patch_size = kPatchSize;
  Index model_input_side = kModelInputSide;

  void validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error(Errc::ConfigError, "threshold must lie in (0, 1)");
    if (patch_size < 1 || model_input_side < 1) throw Error(Errc::ConfigError, "sizes must be positive");
  }
};

/// p > threshold is cloud; p == threshold is clear.
template <typename Scalar>
MaskPatch<Scalar> binarize(const MaskPatch<Scalar>& prob, double threshold) {
  MaskPatch<Scalar> out{prob.row, prob.col, MaskKind::Binary, {}};
  out.values = (prob.values.array() > Scalar(threshold)).template cast<Scalar>();
  return out;
}

/// Probability map at the model input side for one normalized patch.
template <typename Scalar>
MaskPatch<Scalar> predict_probability(const Network<Scalar>& net, const SpectralPatch<Scalar>& patch,
                                      const InferenceConfig& cfg) {
  const auto small = resize_patch(patch, cfg.model_input_side, Resample::Bilinear);
  return {patch.row, patch.col, MaskKind::Probability, to_raster(forward(net, to_feature_map(small)))};
}

/// resize to the model side -> forward -> binarize -> nearest resize back.
template <typename Scalar>
MaskPatch<Scalar> predict_patch(const Network<Scalar>& net, const SpectralPatch<Scalar>& patch,
                                const InferenceConfig& cfg, MaskPatch<Scalar>* probability = nullptr) {
  cfg.validate();
  const auto prob = predict_probability(net, patch, cfg);
  if (probability) *probability = resize_patch(prob, patch.side(), Resample::Bilinear);
  return resize_patch(binarize(prob, cfg.threshold), patch.side(), Resample::Nearest);
}

template <typename Scalar>
std::vector<MaskPatch<Scalar>> predict_patches(const Network<Scalar>& net,
                                               const std::vector<SpectralPatch<Scalar>>& patches,
                                               const InferenceConfig& cfg,
                                               std::vector<MaskPatch<Scalar>>* probabilities = nullptr) {
  std::vector<MaskPatch<Scalar>> out;
  out.reserve(patches.size());
  for (const auto& p : patches) {
    MaskPatch<Scalar> prob;
    out.push_back(predict_patch(net, p, cfg, probabilities ? &prob : nullptr));
    if (probabilities) probabilities->push_back(std::move(prob));
  }
  return out;
}

template <typename Scalar>
struct ScenePrediction {
  BinaryMask mask;
  std::optional<Raster<float>> probability;
};

/// Full-scene mask: cut -> normalize -> per-patch prediction -> stitch.
template <typename Scalar>
ScenePrediction<Scalar> predict_scene_detailed(const Network<Scalar>& net, const SpectralScene& scene,
                                               const InferenceConfig& cfg, bool with_probability = false) {
  cfg.validate();
  if (cfg.model_input_side != net.config.input_side) {
    throw Error(Errc::ShapeMismatch, "inference side " + std::to_string(cfg.model_input_side) +
                                         " differs from network input side " + std::to_string(net.config.input_side));
  }
  auto [grid, raw] = cut_patches(scene, cfg.patch_size);
  std::vector<SpectralPatch<Scalar>> patches;
  patches.reserve(raw.size());
  for (const auto& r : raw) patches.push_back(normalize<Scalar>(r));
  std::vector<MaskPatch<Scalar>> probs;
  const auto masks = predict_patches(net, patches, cfg, with_probability ? &probs : nullptr);

  ScenePrediction<Scalar> out;
  out.mask = stitch(grid, masks).template cast<std::uint8_t>();
  if (with_probability) out.probability = stitch(grid, probs).template cast<float>();
  return out;
}

template <typename Scalar>
BinaryMask predict_scene(const Network<Scalar>& net, const SpectralScene& scene, const InferenceConfig& cfg = {}) {
  return predict_scene_detailed(net, scene, cfg, false).mask;
}

}  // namespace cloudnet
