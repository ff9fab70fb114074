#include "cloudnet/inference.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace cloudnet;

namespace {

const NetworkConfig kSmall = make_config(3, 192, 4);

// Every weight zero, so the output is sigmoid(head bias) everywhere.
Network<double> constant_network(double bias) {
  auto net = build_network<double>(kSmall);
  for (auto& p : net.params) p.value.setZero();
  net.value(net.head.bias)(0, 0) = bias;
  return net;
}

double logit(double p) { return std::log(p / (1 - p)); }

InferenceConfig small_inference() {
  InferenceConfig cfg;
  cfg.model_input_side = 192;
  return cfg;
}

}  // namespace

TEST_CASE("threshold comparison is strict") {
  MaskPatch<double> p{0, 0, MaskKind::Probability, Raster<double>(1, 4)};
  p.values << 0.0, 0.047, std::nextafter(0.047, 1.0), 0.9;
  const auto b = binarize(p, kCloudThreshold);
  CHECK(b.kind == MaskKind::Binary);
  CHECK(b.values(0, 0) == 0);
  CHECK(b.values(0, 1) == 0);
  CHECK(b.values(0, 2) == 1);
  CHECK(b.values(0, 3) == 1);
}

TEST_CASE("constant networks produce constant masks") {
  std::mt19937_64 rng(1);
  const auto scene = test::random_scene(384, 384, rng);
  const auto cfg = small_inference();
  CHECK((predict_scene(constant_network(logit(0.9)), scene, cfg).array() == 1).all());
  CHECK((predict_scene(constant_network(logit(0.01)), scene, cfg).array() == 0).all());

  // A bias whose sigmoid lands exactly on the threshold.
  double b = logit(kCloudThreshold);
  bool found = false;
  for (int i = 0; i < 4000 && !found; ++i) {
    if (sigmoid(b) == kCloudThreshold) {
      found = true;
      break;
    }
    b = std::nextafter(b, sigmoid(b) < kCloudThreshold ? 1.0 : -1.0);
  }
  REQUIRE(found);
  const auto net = constant_network(b);
  const FeatureMap<double> zero(4, 192, 192);
  CHECK((forward(net, zero).data.array() == kCloudThreshold).all());
  CHECK((predict_scene(net, scene, cfg).array() == 0).all());
}

TEST_CASE("scene masks keep the scene footprint") {
  std::mt19937_64 rng(2);
  const auto net = build_network<double>(kSmall, {InitScheme::HeUniform, 0, 1});
  for (Index side : {768, 1000}) {
    const auto scene = test::random_scene(side, side, rng);
    const auto pred = predict_scene_detailed(net, scene, small_inference(), true);
    CHECK(pred.mask.rows() == side);
    CHECK(pred.mask.cols() == side);
    CHECK(is_binary(pred.mask));
    REQUIRE(pred.probability);
    CHECK(pred.probability->rows() == side);
    CHECK(pred.probability->minCoeff() >= 0.0f);
    CHECK(pred.probability->maxCoeff() <= 1.0f);
  }
  const auto odd = test::random_scene(500, 700, rng);
  const auto m = predict_scene(net, odd, small_inference());
  CHECK(m.rows() == 500);
  CHECK(m.cols() == 700);
}

TEST_CASE("patch order does not change the stitched mask") {
  std::mt19937_64 rng(3);
  const auto net = build_network<double>(kSmall, {InitScheme::HeUniform, 0, 2});
  const auto scene = test::random_scene(768, 768, rng);
  const auto cfg = small_inference();
  auto [grid, raw] = cut_patches(scene);
  std::vector<SpectralPatch<double>> patches;
  for (const auto& r : raw) patches.push_back(normalize<double>(r));
  const auto ordered = stitch(grid, predict_patches(net, patches, cfg));
  std::reverse(patches.begin(), patches.end());
  const auto reversed = stitch(grid, predict_patches(net, patches, cfg));
  CHECK(ordered == reversed);
  CHECK(ordered.cast<std::uint8_t>() == predict_scene(net, scene, cfg));
}

TEST_CASE("raising the threshold never adds cloud pixels") {
  std::mt19937_64 rng(4);
  const auto net = build_network<double>(kSmall, {InitScheme::HeUniform, 0, 3});
  const auto scene = test::random_scene(384, 384, rng);
  auto cfg = small_inference();
  const auto probability = *predict_scene_detailed(net, scene, cfg, true).probability;
  CHECK(probability.maxCoeff() > probability.minCoeff());
  BinaryMask prev;
  for (double t : {0.01, 0.047, 0.2, 0.5, 0.8, 0.99}) {
    cfg.threshold = t;
    const auto m = predict_scene(net, scene, cfg);
    if (prev.size()) CHECK(((m.array() == 1) && (prev.array() == 0)).count() == 0);
    prev = m;
  }
}

TEST_CASE("configuration errors") {
  std::mt19937_64 rng(5);
  const auto net = constant_network(0);
  const auto scene = test::random_scene(384, 384, rng);
  InferenceConfig cfg;
  cfg.model_input_side = 96;
  CHECK_THROWS_AS(predict_scene(net, scene, cfg), Error);
  cfg = small_inference();
  cfg.threshold = 1.5;
  CHECK_THROWS_AS(predict_scene(net, scene, cfg), Error);
  CHECK(InferenceConfig{}.threshold == 0.047);
  CHECK(InferenceConfig{}.patch_size == 384);
  CHECK(InferenceConfig{}.model_input_side == 192);
}
