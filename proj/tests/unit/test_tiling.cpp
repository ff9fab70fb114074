#include "cloudnet/tiling.hpp"

#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace cloudnet;
using cloudnet::test::random_scene;

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

TEST_CASE("grid geometry") {
  const auto g768 = PatchGrid::make(768, 768);
  CHECK(g768.rows == 2);
  CHECK(g768.cols == 2);
  CHECK(g768.pad_bottom == 0);
  CHECK(g768.pad_right == 0);

  const auto g1000 = PatchGrid::make(1000, 1000);
  CHECK(g1000.rows == 3);
  CHECK(g1000.cols == 3);
  CHECK(g1000.pad_bottom == 152);
  CHECK(g1000.pad_right == 152);

  const auto g1 = PatchGrid::make(1, 385);
  CHECK(g1.rows == 1);
  CHECK(g1.cols == 2);
  CHECK(g1.pad_bottom == 383);
  CHECK(g1.pad_right == 383);
}

TEST_CASE("patch names round trip") {
  CHECK(patch_name(2, 3, "LC08_abc") == "patch_2_3_LC08_abc");
  const auto p = parse_patch_name("patch_2_3_LC08_abc");
  REQUIRE(p);
  CHECK(p->row == 2);
  CHECK(p->col == 3);
  CHECK(p->scene_id == "LC08_abc");
  CHECK_FALSE(parse_patch_name("tile_1_1_x"));
}

TEST_CASE("a 768 scene cuts into four patches whose content matches the source") {
  std::mt19937_64 rng(1);
  const auto scene = random_scene(768, 768, rng);
  const auto [grid, patches] = cut_patches(scene);
  REQUIRE(patches.size() == 4);
  std::set<std::pair<Index, Index>> ids;
  for (const auto& p : patches) {
    ids.insert({p.row, p.col});
    for (int b = 0; b < kBandCount; ++b) {
      CHECK(p.bands[b].rows() == 384);
      CHECK(p.bands[b] == scene.bands[b].block(p.row * 384, p.col * 384, 384, 384));
    }
  }
  CHECK(ids == std::set<std::pair<Index, Index>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
}

TEST_CASE("a 1000 scene pads with zeros and crops back") {
  std::mt19937_64 rng(2);
  const auto scene = random_scene(1000, 1000, rng);
  const auto [grid, patches] = cut_patches(scene);
  REQUIRE(patches.size() == 9);
  for (const auto& p : patches) {
    if (p.row == 2) CHECK((p.bands[0].bottomRows(152).array() == 0).all());
    if (p.col == 2) CHECK((p.bands[0].rightCols(152).array() == 0).all());
  }
  std::vector<Tile<std::uint16_t>> tiles;
  for (const auto& p : patches) tiles.push_back({p.row, p.col, p.bands[2]});
  const auto back = stitch_tiles(grid, tiles);
  CHECK(back.rows() == 1000);
  CHECK(back == scene.bands[2]);
}

TEST_CASE("a scene the size of one patch is a single identity patch") {
  std::mt19937_64 rng(3);
  const auto scene = random_scene(384, 384, rng);
  const auto [grid, patches] = cut_patches(scene);
  REQUIRE(patches.size() == 1);
  CHECK(patches[0].row == 0);
  CHECK(patches[0].col == 0);
  for (int b = 0; b < kBandCount; ++b) CHECK(patches[0].bands[b] == scene.bands[b]);
}

TEST_CASE("normalization divides by the 16-bit maximum") {
  RawPatch raw;
  for (auto& b : raw.bands) b = BandRaster::Zero(1, 3);
  raw.bands[0] << 0, 65535, 13107;
  const auto n = normalize<float>(raw);
  CHECK(n.bands[0](0, 0) == 0.0f);
  CHECK(n.bands[0](0, 1) == 1.0f);
  CHECK(std::abs(n.bands[0](0, 2) - 0.2f) < 1e-7f);

  // Monotone over every representable value.
  RawPatch all;
  for (auto& b : all.bands) b = BandRaster(1, 65536);
  for (int v = 0; v < 65536; ++v) all.bands[0](0, v) = std::uint16_t(v);
  const auto na = normalize<double>(all);
  for (int v = 1; v < 65536; ++v) REQUIRE(na.bands[0](0, v) > na.bands[0](0, v - 1));
}

TEST_CASE("bilinear downsampling keeps constants and resolution target") {
  SpectralPatch<float> p;
  for (auto& b : p.bands) b = Raster<float>::Constant(384, 384, 0.37f);
  const auto r = resize_patch(p, 192);
  for (int b = 0; b < kBandCount; ++b) {
    CHECK(r.bands[b].rows() == 192);
    CHECK(r.bands[b].cols() == 192);
    CHECK((r.bands[b].array() == 0.37f).all());
  }
}

TEST_CASE("bilinear halving averages 2x2 blocks") {
  // Half-pixel centred halving samples exactly between four source pixels.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  Raster<double> src(8, 8);
  for (Index i = 0; i < src.size(); ++i) src.data()[i] = u(rng);
  const auto out = resize_raster(src, 4, 4, Resample::Bilinear);
  for (Index y = 0; y < 4; ++y) {
    for (Index x = 0; x < 4; ++x) {
      const double avg = src.block(2 * y, 2 * x, 2, 2).mean();
      CHECK(out(y, x) == doctest::Approx(avg).epsilon(1e-12));
    }
  }
}

TEST_CASE("nearest upsampling of a binary mask keeps its values") {
  std::mt19937_64 rng(5);
  MaskPatch<float> m{0, 0, MaskKind::Binary, Raster<float>(192, 192)};
  for (Index i = 0; i < m.values.size(); ++i) m.values.data()[i] = float(rng() & 1);
  const auto up = resize_patch(m, 384, Resample::Nearest);
  CHECK(up.values.rows() == 384);
  for (Index y = 0; y < 384; ++y)
    for (Index x = 0; x < 384; ++x) REQUIRE(up.values(y, x) == m.values(y / 2, x / 2));

  CHECK(code_of([&] { resize_patch(m, 384, Resample::Bilinear); }) == Errc::InvalidMethod);
}

TEST_CASE("nearest resampling never invents values") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<Index> side(1, 300);
  for (int trial = 0; trial < 40; ++trial) {
    Raster<float> src(side(rng), side(rng));
    for (Index i = 0; i < src.size(); ++i) src.data()[i] = float(rng() % 3);
    const auto out = resize_raster(src, side(rng), side(rng), Resample::Nearest);
    std::set<float> in_vals(src.data(), src.data() + src.size());
    for (Index i = 0; i < out.size(); ++i) REQUIRE(in_vals.count(out.data()[i]) == 1);
  }
}

TEST_CASE("stitching rejects missing and duplicate patches") {
  const auto grid = PatchGrid::make(1000, 1000);
  std::vector<MaskPatch<float>> patches;
  for (Index r = 0; r < 3; ++r)
    for (Index c = 0; c < 3; ++c)
      patches.push_back({r, c, MaskKind::Binary, Raster<float>::Zero(384, 384)});

  auto missing = patches;
  missing.erase(missing.begin() + 4);
  CHECK(code_of([&] { stitch(grid, missing); }) == Errc::MissingPatch);

  auto dup = patches;
  dup.push_back(patches[0]);
  CHECK(code_of([&] { stitch(grid, dup); }) == Errc::DuplicatePatch);

  auto bad = patches;
  bad[1].values = Raster<float>::Zero(192, 192);
  CHECK(code_of([&] { stitch(grid, bad); }) == Errc::ShapeMismatch);

  CHECK(stitch(grid, patches).rows() == 1000);
}

TEST_CASE("cut then stitch is the identity on random sizes") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<Index> side(1, 1200);
  for (int trial = 0; trial < 30; ++trial) {
    const Index h = side(rng), w = side(rng);
    Raster<std::uint16_t> src(h, w);
    for (Index i = 0; i < src.size(); ++i) src.data()[i] = std::uint16_t(rng());
    const auto grid = PatchGrid::make(h, w);
    auto tiles = cut_raster(src, grid);
    CHECK(Index(tiles.size()) == grid.rows * grid.cols);
    CHECK(grid.rows * 384 >= h);
    CHECK((grid.rows - 1) * 384 < h);
    CHECK(grid.cols * 384 >= w);
    CHECK((grid.cols - 1) * 384 < w);
    std::shuffle(tiles.begin(), tiles.end(), rng);
    REQUIRE(stitch_tiles(grid, tiles) == src);
  }
}
