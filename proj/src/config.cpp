#include "cloudnet/config.hpp"

#include "cloudnet/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace cloudnet {

using nlohmann::json;

void TrainConfig::validate() const {
  schedule().validate();
  if (max_epochs < 0) throw Error(Errc::ConfigError, "max_epochs must be non-negative");
  if (batch_size < 1) throw Error(Errc::ConfigError, "batch_size must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw Error(Errc::ConfigError, "validation_fraction must lie in [0, 1)");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.epsilon > 0.0)) {
    throw Error(Errc::ConfigError, "invalid Adam constants");
  }
  if (!(init_bound > 0.0)) throw Error(Errc::ConfigError, "init_bound must be positive");
}

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  augment.seed = s;
}

std::filesystem::path RunConfig::checkpoint_path() const {
  return paths.checkpoint.empty() ? paths.output_dir / "best.ckpt" : paths.checkpoint;
}

void RunConfig::validate() const {
  network.validate();
  train.validate();
  augment.validate();
  inference.validate();
  if (inference.model_input_side != network.input_side) {
    throw Error(Errc::ConfigError, "inference.model_input_side must equal network.input_side");
  }
}

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "section '" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw Error(Errc::ConfigError, "unknown key '" + key + "' in " + section);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json to_json(const NetworkConfig& c) {
  return {{"input_side", c.input_side},
          {"input_channels", c.input_channels},
          {"depth_schedule", c.depth_schedule},
          {"bottleneck_depth", c.bottleneck_depth},
          {"kernel_size", c.kernel_size},
          {"output_channels", c.output_channels}};
}

NetworkConfig network_from_json(const json& j) {
  check_keys(j, "network",
             {"input_side", "input_channels", "depth_schedule", "bottleneck_depth", "kernel_size", "output_channels"});
  NetworkConfig c;
  read(j, "input_side", c.input_side);
  read(j, "input_channels", c.input_channels);
  read(j, "depth_schedule", c.depth_schedule);
  if (j.contains("depth_schedule") && !j.contains("bottleneck_depth") && !c.depth_schedule.empty()) {
    c.bottleneck_depth = 2 * c.depth_schedule.back();
  }
  read(j, "bottleneck_depth", c.bottleneck_depth);
  read(j, "kernel_size", c.kernel_size);
  read(j, "output_channels", c.output_channels);
  return c;
}

std::string init_name(InitScheme s) { return s == InitScheme::Uniform ? "uniform" : "he_uniform"; }

InitScheme parse_init(const std::string& s) {
  if (s == "uniform") return InitScheme::Uniform;
  if (s == "he_uniform") return InitScheme::HeUniform;
  throw Error(Errc::ConfigError, "unknown init scheme '" + s + "'");
}

}  // namespace

std::string network_config_json(const NetworkConfig& cfg) { return to_json(cfg).dump(); }

NetworkConfig parse_network_config(const std::string& text) {
  try {
    return network_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, e.what());
  }
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  try {
    const json j = json::parse(text);
    check_keys(j, "config", {"seed", "paths", "network", "train", "augment", "inference"});
    if (!j.contains("seed")) throw Error(Errc::ConfigError, "config must set \"seed\"");
    const auto seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      check_keys(p, "paths", {"data_root", "output_dir", "checkpoint"});
      if (p.contains("data_root")) cfg.paths.data_root = p.at("data_root").get<std::string>();
      if (p.contains("output_dir")) cfg.paths.output_dir = p.at("output_dir").get<std::string>();
      if (p.contains("checkpoint")) cfg.paths.checkpoint = p.at("checkpoint").get<std::string>();
    }
    if (j.contains("network")) cfg.network = network_from_json(j.at("network"));
    if (j.contains("train")) {
      const auto& t = j.at("train");
      check_keys(t, "train",
                 {"initial_lr", "decay_rate", "patience", "lr_floor", "improvement_tolerance", "max_epochs",
                  "batch_size", "adam", "validation_fraction", "init", "init_bound"});
      read(t, "initial_lr", cfg.train.initial_lr);
      read(t, "decay_rate", cfg.train.decay_rate);
      read(t, "patience", cfg.train.patience);
      read(t, "lr_floor", cfg.train.lr_floor);
      read(t, "improvement_tolerance", cfg.train.improvement_tolerance);
      read(t, "max_epochs", cfg.train.max_epochs);
      read(t, "batch_size", cfg.train.batch_size);
      read(t, "validation_fraction", cfg.train.validation_fraction);
      read(t, "init_bound", cfg.train.init_bound);
      if (t.contains("init")) cfg.train.init = parse_init(t.at("init").get<std::string>());
      if (t.contains("adam")) {
        const auto& a = t.at("adam");
        check_keys(a, "train.adam", {"beta1", "beta2", "epsilon"});
        read(a, "beta1", cfg.train.adam.beta1);
        read(a, "beta2", cfg.train.adam.beta2);
        read(a, "epsilon", cfg.train.adam.epsilon);
      }
    }
    if (j.contains("augment")) {
      const auto& a = j.at("augment");
      check_keys(a, "augment", {"flip_probability", "rotation_choices", "zoom_range"});
      read(a, "flip_probability", cfg.augment.flip_probability);
      read(a, "rotation_choices", cfg.augment.rotation_choices);
      if (a.contains("zoom_range")) {
        const auto z = a.at("zoom_range").get<std::vector<double>>();
        if (z.size() != 2) throw Error(Errc::ConfigError, "zoom_range must be [min, max]");
        cfg.augment.zoom_min = z[0];
        cfg.augment.zoom_max = z[1];
      }
    }
    if (j.contains("inference")) {
      const auto& i = j.at("inference");
      check_keys(i, "inference", {"threshold", "patch_size", "model_input_side"});
      read(i, "threshold", cfg.inference.threshold);
      read(i, "patch_size", cfg.inference.patch_size);
      read(i, "model_input_side", cfg.inference.model_input_side);
    }
    if (!j.contains("inference") || !j.at("inference").contains("model_input_side")) {
      cfg.inference.model_input_side = cfg.network.input_side;
    }
    cfg.apply_seed(seed);
    cfg.validate();
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["paths"] = {{"data_root", cfg.paths.data_root.string()},
                {"output_dir", cfg.paths.output_dir.string()},
                {"checkpoint", cfg.paths.checkpoint.string()}};
  j["network"] = to_json(cfg.network);
  const auto& t = cfg.train;
  j["train"] = {{"initial_lr", t.initial_lr},
                {"decay_rate", t.decay_rate},
                {"patience", t.patience},
                {"lr_floor", t.lr_floor},
                {"improvement_tolerance", t.improvement_tolerance},
                {"max_epochs", t.max_epochs},
                {"batch_size", t.batch_size},
                {"validation_fraction", t.validation_fraction},
                {"init", init_name(t.init)},
                {"init_bound", t.init_bound},
                {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}}}};
  j["augment"] = {{"flip_probability", cfg.augment.flip_probability},
                  {"rotation_choices", cfg.augment.rotation_choices},
                  {"zoom_range", {cfg.augment.zoom_min, cfg.augment.zoom_max}}};
  j["inference"] = {{"threshold", cfg.inference.threshold},
                    {"patch_size", cfg.inference.patch_size},
                    {"model_input_side", cfg.inference.model_input_side}};
  return j.dump(2);
}

}  // namespace cloudnet
