#pragma once

#include "cloudnet/augment.hpp"
#include "cloudnet/inference.hpp"
#include "cloudnet/model.hpp"
#include "cloudnet/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace cloudnet {

struct RunPaths {
  std::filesystem::path data_root;
  std::filesystem::path output_dir = "out";
  std::filesystem::path checkpoint;  // defaults to <output_dir>/best.ckpt
};

/// Everything one CLI run needs. `seed` has no default and must be given.
struct RunConfig {
  std::uint64_t seed = 0;
  RunPaths paths;
  NetworkConfig network;
  TrainConfig train;
  AugmentationPolicy augment;
  InferenceConfig inference;

  /// Propagates `seed` into the training and augmentation sections.
  void apply_seed(std::uint64_t s);
  std::filesystem::path checkpoint_path() const;
  void validate() const;
};

/// Parses a JSON config. Unknown keys and a missing "seed" are ConfigErrors.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& cfg);

std::string network_config_json(const NetworkConfig& cfg);
NetworkConfig parse_network_config(const std::string& json_text);

}  // namespace cloudnet
