#include "cloudnet/config.hpp"

#include <doctest.h>

using namespace cloudnet;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::IoError;
}

}  // namespace

TEST_CASE("bundled fixture config parses") {
  const auto cfg = load_run_config(std::string(CLOUDNET_TEST_DATA) + "/synthetic/config.json");
  CHECK(cfg.seed == 7);
  CHECK(cfg.train.seed == 7);
  CHECK(cfg.augment.seed == 7);
  CHECK(cfg.network.depth_schedule == std::vector<Index>{8, 16});
  CHECK(cfg.network.bottleneck_depth == 32);
  CHECK(cfg.train.batch_size == 2);
  CHECK(cfg.inference.patch_size == 64);
  CHECK(cfg.augment.zoom_max == 1.2);
}

TEST_CASE("defaults") {
  const auto cfg = parse_run_config(R"({"seed": 1})");
  CHECK(cfg.train.initial_lr == 1e-4);
  CHECK(cfg.train.decay_rate == 0.7);
  CHECK(cfg.train.patience == 15);
  CHECK(cfg.train.lr_floor == 1e-9);
  CHECK(cfg.inference.threshold == 0.047);
  CHECK(cfg.network == NetworkConfig{});
  CHECK(cfg.checkpoint_path() == std::filesystem::path("out") / "best.ckpt");
}

TEST_CASE("bottleneck follows a custom schedule") {
  const auto cfg = parse_run_config(R"({"seed": 1, "network": {"depth_schedule": [4, 8, 16]}})");
  CHECK(cfg.network.bottleneck_depth == 32);
}

TEST_CASE("rejected configs") {
  CHECK(code_of([] { parse_run_config(R"({"network": {}})"); }) == Errc::ConfigError);
  CHECK(code_of([] { parse_run_config(R"({"seed": 1, "trian": {}})"); }) == Errc::ConfigError);
  CHECK(code_of([] { parse_run_config(R"({"seed": 1, "train": {"lr": 1}})"); }) == Errc::ConfigError);
  CHECK(code_of([] { parse_run_config(R"({"seed": 1, "train": {"init": "gauss"}})"); }) == Errc::ConfigError);
  CHECK(code_of([] { parse_run_config("{not json"); }) == Errc::ConfigError);
  CHECK(code_of([] { parse_run_config(R"({"seed": 1, "network": {"depth_schedule": [16, 48]}})"); }) ==
        Errc::ConfigError);
  CHECK(code_of([] { parse_run_config(R"({"seed": 1, "augment": {"zoom_range": [0.5, 1.0]}})"); }) ==
        Errc::ConfigError);
}

TEST_CASE("dump and parse round trip") {
  auto cfg = parse_run_config(R"({"seed": 9, "train": {"init": "he_uniform", "max_epochs": 3}})");
  cfg.paths.data_root = "/data";
  const auto back = parse_run_config(dump_run_config(cfg));
  CHECK(back.seed == 9);
  CHECK(back.train.init == InitScheme::HeUniform);
  CHECK(back.train.max_epochs == 3);
  CHECK(back.paths.data_root == "/data");
  CHECK(dump_run_config(back) == dump_run_config(cfg));

  const auto net = make_config(3, 64, 8);
  CHECK(parse_network_config(network_config_json(net)) == net);
}
