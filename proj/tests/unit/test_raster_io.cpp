#include "cloudnet/raster_io.hpp"

#include "cloudnet/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>

using namespace cloudnet;
using cloudnet::test::TempDir;

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

std::array<fs::path, kBandCount> scene_paths(const fs::path& root, Split split, const std::string& id) {
  std::array<fs::path, kBandCount> p;
  for (int b = 0; b < kBandCount; ++b) p[b] = layout_path(root, split, kBandNames[b], id);
  return p;
}

void write_layout_scene(const fs::path& root, Split split, const std::string& id, Index side,
                        std::mt19937_64& rng, bool with_gt) {
  auto scene = test::random_scene(side, side, rng, id);
  const auto paths = scene_paths(root, split, id);
  for (const auto& p : paths) fs::create_directories(p.parent_path());
  write_scene(scene, paths);
  if (with_gt) {
    const auto gt = layout_path(root, split, kGtName, id);
    fs::create_directories(gt.parent_path());
    write_mask_tiff(gt, test::random_mask(side, side, rng));
  }
}

}  // namespace

TEST_CASE("band rasters round trip bit-exactly") {
  TempDir dir("band");
  std::mt19937_64 rng(1);
  for (const auto& [h, w] : std::vector<std::pair<Index, Index>>{{1, 1}, {7, 300}, {384, 384}, {513, 17}}) {
    const auto b = test::random_band(h, w, rng);
    const auto path = dir.path() / "b.TIF";
    write_band_tiff(path, b);
    CHECK(read_band_tiff(path) == b);
  }
  Raster<float> f(5, 9);
  for (Index i = 0; i < f.size(); ++i) f.data()[i] = float(i) / 7.0f;
  write_float_tiff(dir.path() / "f.TIF", f);
  CHECK(read_float_tiff(dir.path() / "f.TIF") == f);
}

TEST_CASE("scene loading validates band count and sizes") {
  TempDir dir("scene");
  std::mt19937_64 rng(2);
  const auto scene = test::random_scene(64, 48, rng, "s1");
  std::array<fs::path, kBandCount> paths;
  for (int b = 0; b < kBandCount; ++b) paths[b] = dir.path() / (std::string(kBandNames[b]) + ".TIF");
  write_scene(scene, paths);

  const auto loaded = load_scene({paths.begin(), paths.end()}, "s1");
  CHECK(loaded.height() == 64);
  CHECK(loaded.width() == 48);
  for (int b = 0; b < kBandCount; ++b) CHECK(loaded.bands[b] == scene.bands[b]);

  CHECK(code_of([&] { load_scene({paths[0], paths[1], paths[2]}, "s1"); }) == Errc::MissingBand);
  CHECK(code_of([&] { load_scene({paths[0], paths[1], paths[2], dir.path() / "nope.TIF"}); }) ==
        Errc::MissingBand);

  write_band_tiff(dir.path() / "odd.TIF", test::random_band(768, 767, rng));
  write_band_tiff(dir.path() / "even.TIF", test::random_band(768, 768, rng));
  const fs::path e = dir.path() / "even.TIF";
  CHECK(code_of([&] { load_scene({e, e, e, dir.path() / "odd.TIF"}); }) == Errc::DimensionMismatch);
}

TEST_CASE("ground truth loads as 0/1") {
  TempDir dir("gt");
  std::mt19937_64 rng(3);
  const auto scene = test::random_scene(32, 32, rng);

  BinaryMask raw(32, 32);
  for (Index i = 0; i < raw.size(); ++i) raw.data()[i] = (i % 3 == 0) ? 255 : 0;
  write_mask_tiff(dir.path() / "gt.TIF", raw);
  const auto gt = load_gt(dir.path() / "gt.TIF", scene);
  CHECK(is_binary(gt.mask));
  for (Index i = 0; i < raw.size(); ++i) CHECK(gt.mask.data()[i] == (raw.data()[i] ? 1 : 0));

  write_mask_tiff(dir.path() / "zero.TIF", BinaryMask::Zero(32, 32));
  CHECK(load_gt(dir.path() / "zero.TIF", scene).mask.sum() == 0);

  // 16-bit label files are accepted too.
  BandRaster wide = BandRaster::Zero(32, 32);
  wide(1, 1) = 65535;
  write_band_tiff(dir.path() / "wide.TIF", wide);
  const auto w = load_gt(dir.path() / "wide.TIF", scene);
  CHECK(w.mask(1, 1) == 1);
  CHECK(w.mask.cast<int>().sum() == 1);

  const auto big = test::random_scene(384, 384, rng);
  write_mask_tiff(dir.path() / "big.TIF", BinaryMask::Zero(768, 768));
  CHECK(code_of([&] { load_gt(dir.path() / "big.TIF", big); }) == Errc::DimensionMismatch);
}

TEST_CASE("non-TIFF input is a decode error") {
  TempDir dir("bad");
  std::ofstream(dir.path() / "x.TIF") << "definitely not a tiff";
  CHECK(code_of([&] { read_band_tiff(dir.path() / "x.TIF"); }) == Errc::DecodeError);
}

TEST_CASE("manifest discovers every scene in the layout") {
  TempDir dir("manifest");
  std::mt19937_64 rng(4);
  for (int i = 0; i < 18; ++i) write_layout_scene(dir.path(), Split::Train, "LC08_" + std::to_string(i), 8, rng, true);
  const auto m = build_manifest(dir.path(), Split::Train);
  CHECK(m.entries.size() == 18);
  CHECK(m.split == Split::Train);
  for (std::size_t i = 1; i < m.entries.size(); ++i) CHECK(m.entries[i - 1].scene_id < m.entries[i].scene_id);
  for (const auto& e : m.entries) {
    CHECK(e.gt);
    CHECK(e.bands[3] == layout_path(dir.path(), Split::Train, "nir", e.scene_id));
  }

  const auto again = build_manifest(dir.path(), Split::Train);
  REQUIRE(again.entries.size() == m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    CHECK(again.entries[i].scene_id == m.entries[i].scene_id);
    CHECK(again.entries[i].bands == m.entries[i].bands);
  }

  // Absent split directory is an empty split, not an error.
  CHECK(build_manifest(dir.path(), Split::Test).entries.empty());

  const auto csv = dir.path() / "train.csv";
  write_manifest_csv(csv, m);
  const auto read = read_manifest_csv(csv, Split::Train);
  REQUIRE(read.entries.size() == 18);
  for (std::size_t i = 0; i < 18; ++i) {
    CHECK(read.entries[i].scene_id == m.entries[i].scene_id);
    CHECK(read.entries[i].bands == m.entries[i].bands);
    CHECK(read.entries[i].gt == m.entries[i].gt);
  }
}

TEST_CASE("manifest errors") {
  TempDir dir("manifest_err");
  std::mt19937_64 rng(5);
  write_layout_scene(dir.path(), Split::Train, "a", 8, rng, true);
  write_layout_scene(dir.path(), Split::Train, "b", 8, rng, true);
  fs::remove(layout_path(dir.path(), Split::Train, "nir", "b"));
  try {
    build_manifest(dir.path(), Split::Train);
    FAIL("expected MissingBand");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingBand);
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }

  TempDir nogt("manifest_nogt");
  write_layout_scene(nogt.path(), Split::Train, "a", 8, rng, true);
  fs::remove(layout_path(nogt.path(), Split::Train, kGtName, "a"));
  CHECK(code_of([&] { build_manifest(nogt.path(), Split::Train); }) == Errc::MissingGT);

  // Test scenes may come without labels.
  write_layout_scene(nogt.path(), Split::Test, "t", 8, rng, false);
  const auto test_split = build_manifest(nogt.path(), Split::Test);
  REQUIRE(test_split.entries.size() == 1);
  CHECK_FALSE(test_split.entries[0].gt);

  CHECK(code_of([&] { build_manifest(dir.path() / "absent", Split::Train); }) == Errc::LayoutError);
}

TEST_CASE("split names") {
  CHECK(split_name(Split::Train) == "train");
  CHECK(split_name(Split::Test) == "test");
  CHECK(parse_split("test") == Split::Test);
  CHECK_THROWS_AS(parse_split("val"), Error);
}
