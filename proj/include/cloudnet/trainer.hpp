#pragma once

#include "cloudnet/augment.hpp"
#include "cloudnet/error.hpp"
#include "cloudnet/loss.hpp"
#include "cloudnet/model.hpp"
#include "cloudnet/optim.hpp"
#include "cloudnet/raster_io.hpp"
#include "cloudnet/tiling.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cloudnet {

struct TrainConfig {
  double initial_lr = 1e-4;
  double decay_rate = 0.7;
  int patience = 15;
  double lr_floor = 1e-9;
  double improvement_tolerance = 1e-8;
  int max_epochs = 100;
  int batch_size = 16;
  std::uint64_t seed = 0;
  AdamConfig adam;
  /// Fraction of samples held out to drive the plateau policy; 0 monitors the training set.
  double validation_fraction = 0.0;
  InitScheme init = InitScheme::Uniform;
  double init_bound = 1.0;

  PlateauSchedule schedule() const {
    return {initial_lr, decay_rate, patience, lr_floor, improvement_tolerance};
  }
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};

template <typename Scalar>
struct TrainState {
  Network<Scalar> network;
  AdamState<Scalar> adam;
  LrState lr;
  int epoch = 0;  // completed epochs
  std::vector<EpochRecord> history;
};

template <typename Scalar>
struct TrainingSample {
  SpectralPatch<Scalar> patch;
  MaskPatch<Scalar> mask;  // binary
};

template <typename Scalar>
struct TrainResult {
  TrainState<Scalar> final_state;
  TrainState<Scalar> best_state;  // snapshot after the best monitored epoch
};

template <typename Scalar>
struct TrainHooks {
  /// After every epoch; `improved` is true when the monitored loss set a new best.
  std::function<void(const TrainState<Scalar>&, bool improved)> on_epoch_end;
};

// ---------------------------------------------------------------------------

/// Mean soft-Jaccard loss and its gradient over a batch at fixed parameters.
template <typename Scalar>
Scalar loss_and_gradient(const Network<Scalar>& net, const std::vector<FeatureMap<Scalar>>& inputs,
                         const std::vector<Mat<Scalar>>& targets, Gradients<Scalar>* grads,
                         Scalar epsilon = Scalar(kJaccardEpsilon)) {
  if (inputs.empty()) throw Error(Errc::EmptyBatch, "batch has no samples");
  if (inputs.size() != targets.size()) throw Error(Errc::ShapeMismatch, "inputs and targets differ in count");
  const SoftJaccard<Scalar> loss(epsilon);
  const Scalar scale = Scalar(1) / Scalar(inputs.size());
  Scalar total(0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (grads) {
      const auto trace = forward_trace(net, inputs[i]);
      total += loss.value(targets[i], trace.probability.data);
      backward(net, trace, Mat<Scalar>(loss.gradient(targets[i], trace.probability.data) * scale), *grads);
    } else {
      total += loss.value(targets[i], forward(net, inputs[i]).data);
    }
  }
  return total * scale;
}

template <typename Scalar>
Scalar mean_loss(const Network<Scalar>& net, const std::vector<TrainingSample<Scalar>>& samples) {
  std::vector<FeatureMap<Scalar>> inputs;
  std::vector<Mat<Scalar>> targets;
  for (const auto& s : samples) {
    inputs.push_back(to_feature_map(s.patch));
    targets.push_back(flatten(s.mask.values));
  }
  return loss_and_gradient<Scalar>(net, inputs, targets, nullptr);
}

namespace detail {

inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng = sample_stream(seed, std::uint64_t(epoch), ~std::uint64_t{0});
  // Fisher-Yates with explicit index draws so the order does not depend on the standard library.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = std::size_t((double(rng() >> 11) * 0x1.0p-53) * double(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  return order;
}

}  // namespace detail

/// Fresh state: network drawn from the config's initializer seeded with `cfg.seed`.
template <typename Scalar>
TrainState<Scalar> initial_state(const NetworkConfig& net_config, const TrainConfig& cfg) {
  cfg.validate();
  TrainState<Scalar> s;
  s.network = build_network<Scalar>(net_config, WeightInit{cfg.init, cfg.init_bound, cfg.seed});
  s.lr = LrState::start(cfg.schedule());
  return s;
}

/// Continues `state` until `cfg.max_epochs` epochs are complete. Each epoch
/// re-draws augmentations, shuffles, applies Adam per mini-batch, then
/// evaluates the monitored loss (without augmentation) and steps the
/// plateau schedule.
template <typename Scalar>
TrainResult<Scalar> train_samples(const std::vector<TrainingSample<Scalar>>& all_samples, TrainState<Scalar> state,
                                  const TrainConfig& cfg, const AugmentationPolicy& policy,
                                  const TrainHooks<Scalar>& hooks = {}) {
  cfg.validate();
  policy.validate();
  TrainResult<Scalar> result;
  if (cfg.max_epochs <= state.epoch) {
    result.best_state = state;
    result.final_state = std::move(state);
    return result;
  }
  if (all_samples.empty()) throw Error(Errc::EmptyDataset, "no training samples");

  // Hold out the tail of a seeded permutation when requested. Both subsets keep
  // the input order so the monitored loss can be recomputed on the same list.
  std::vector<TrainingSample<Scalar>> train_set, monitor_set;
  {
    const auto order = detail::epoch_order(all_samples.size(), cfg.seed, -1);
    const std::size_t held = std::size_t(std::floor(cfg.validation_fraction * double(all_samples.size())));
    std::vector<char> is_held(all_samples.size(), 0);
    for (std::size_t i = order.size() - held; i < order.size(); ++i) is_held[order[i]] = 1;
    for (std::size_t i = 0; i < all_samples.size(); ++i) {
      (is_held[i] ? monitor_set : train_set).push_back(all_samples[i]);
    }
    if (train_set.empty()) throw Error(Errc::EmptyDataset, "validation_fraction leaves no training samples");
  }
  const auto& monitored_samples = monitor_set.empty() ? train_set : monitor_set;

  const PlateauSchedule schedule = cfg.schedule();
  const SoftJaccard<Scalar> loss;
  const std::size_t batch = std::size_t(cfg.batch_size);
  result.best_state = state;
  auto& net = state.network;

  while (state.epoch < cfg.max_epochs) {
    const int epoch = state.epoch + 1;
    const double lr = state.lr.current_lr;
    const auto order = detail::epoch_order(train_set.size(), cfg.seed, epoch);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const Scalar scale = Scalar(1) / Scalar(stop - start);
      Gradients<Scalar> grads = zero_gradients(net);
      Scalar batch_value(0);
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t idx = order[k];
        auto rng = sample_stream(policy.seed, std::uint64_t(epoch), idx);
        const auto [patch, mask] = augment_pair(train_set[idx].patch, train_set[idx].mask, policy, rng);
        const auto trace = forward_trace(net, to_feature_map(patch));
        const Mat<Scalar> target = flatten(mask.values);
        batch_value += loss.value(target, trace.probability.data) * scale;
        backward(net, trace, Mat<Scalar>(loss.gradient(target, trace.probability.data) * scale), grads);
      }
      if (!std::isfinite(double(batch_value))) {
        throw Error(Errc::NonFiniteLoss, "loss became non-finite in epoch " + std::to_string(epoch) +
                                             " at lr " + std::to_string(lr));
      }
      detail::adam_update_impl<Scalar>(
          net.params.size(), [&](std::size_t i) -> Mat<Scalar>& { return net.params[i].value; }, grads, state.adam,
          lr, cfg.adam);
    }

    const double monitored = double(mean_loss(net, monitored_samples));
    if (!std::isfinite(monitored)) {
      throw Error(Errc::NonFiniteLoss, "monitored loss is non-finite after epoch " + std::to_string(epoch));
    }
    const bool improved = monitored < state.lr.best - schedule.tolerance;
    state.lr = lr_step(state.lr, monitored, schedule);
    state.epoch = epoch;
    state.history.push_back({epoch, monitored, lr});
    if (improved) result.best_state = state;
    if (hooks.on_epoch_end) hooks.on_epoch_end(state, improved);
  }
  result.final_state = std::move(state);
  return result;
}

/// Convenience entry: fresh network, `cfg.max_epochs` epochs.
template <typename Scalar>
TrainResult<Scalar> train_samples(const std::vector<TrainingSample<Scalar>>& samples, const NetworkConfig& net_config,
                                  const TrainConfig& cfg, const AugmentationPolicy& policy,
                                  const TrainHooks<Scalar>& hooks = {}) {
  return train_samples(samples, initial_state<Scalar>(net_config, cfg), cfg, policy, hooks);
}

/// Loads every manifest entry, cuts it into `patch_size` tiles, normalizes and
/// resizes each tile to the network input side. Masks use nearest sampling.
template <typename Scalar>
std::vector<TrainingSample<Scalar>> load_training_samples(const DatasetManifest& manifest, Index input_side,
                                                          Index patch_size = kPatchSize) {
  if (manifest.entries.empty()) throw Error(Errc::EmptyDataset, "manifest has no entries");
  for (const auto& e : manifest.entries) {
    if (!e.gt) throw Error(Errc::MissingGT, "scene " + e.scene_id + " has no ground truth");
  }
  std::vector<TrainingSample<Scalar>> samples;
  for (const auto& e : manifest.entries) {
    const SpectralScene scene = load_scene({e.bands.begin(), e.bands.end()}, e.scene_id);
    const GroundTruthMask gt = load_gt(*e.gt, scene);
    auto [grid, raw] = cut_patches(scene, patch_size);
    const auto mask_tiles = cut_raster(gt.mask, grid);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      TrainingSample<Scalar> s;
      s.patch = resize_patch(normalize<Scalar>(raw[i]), input_side, Resample::Bilinear);
      MaskPatch<Scalar> m{raw[i].row, raw[i].col, MaskKind::Binary, mask_tiles[i].pixels.template cast<Scalar>()};
      s.mask = resize_patch(m, input_side, Resample::Nearest);
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

template <typename Scalar>
TrainResult<Scalar> train(const DatasetManifest& manifest, const NetworkConfig& net_config, const TrainConfig& cfg,
                          const AugmentationPolicy& policy, Index patch_size = kPatchSize,
                          const TrainHooks<Scalar>& hooks = {}) {
  if (manifest.split != Split::Train) throw Error(Errc::ConfigError, "training needs a train-split manifest");
  net_config.validate();
  cfg.validate();
  if (cfg.max_epochs == 0) {
    TrainResult<Scalar> r;
    r.final_state = initial_state<Scalar>(net_config, cfg);
    r.best_state = r.final_state;
    return r;
  }
  return train_samples(load_training_samples<Scalar>(manifest, net_config.input_side, patch_size), net_config, cfg,
                       policy, hooks);
}

}  // namespace cloudnet
