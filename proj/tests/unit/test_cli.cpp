#include "cloudnet/checkpoint.hpp"
#include "cloudnet/cli.hpp"
#include "cloudnet/raster_io.hpp"
#include "cloudnet/synthetic.hpp"

#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace cloudnet;
using cloudnet::test::TempDir;

namespace {

struct RunOutput {
  int code;
  std::string out, err;
};

RunOutput run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cloudnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Small three-level network so scene-sized runs stay fast.
std::string write_config(const fs::path& dir, const fs::path& data_root, const std::string& network = "",
                         const std::string& name = "config.json") {
  const std::string net = network.empty() ? R"({"input_side": 192, "depth_schedule": [4, 8, 16]})" : network;
  const fs::path path = dir / name;
  std::ofstream(path) << R"({"seed": 5, "paths": {"data_root": ")" << data_root.string() << R"(", "output_dir": ")"
                      << (dir / "out").string() << R"("}, "network": )" << net
                      << R"(, "train": {"batch_size": 2, "init": "he_uniform"}})";
  return path.string();
}

void write_scene_at(const fs::path& root, Split split, const std::string& id, Index side, std::uint64_t seed) {
  const auto [scene, mask] = make_synthetic_scene(side, side, seed, id);
  std::array<fs::path, kBandCount> paths;
  for (int b = 0; b < kBandCount; ++b) {
    paths[b] = layout_path(root, split, kBandNames[b], id);
    fs::create_directories(paths[b].parent_path());
  }
  write_scene(scene, paths);
  const auto gt = layout_path(root, split, kGtName, id);
  fs::create_directories(gt.parent_path());
  write_mask_tiff(gt, (mask.array() * std::uint8_t(255)).matrix());
}

}  // namespace

TEST_CASE("prepare cuts a 768 scene into four patches") {
  TempDir dir("cli_prepare");
  write_scene_at(dir.path() / "data", Split::Train, "LC08_a", 768, 1);
  const auto cfg = write_config(dir.path(), dir.path() / "data");
  const auto r = run_cli({"prepare", "--config", cfg});
  CHECK(r.code == 0);
  CHECK(r.out.find("train: 1 scenes -> 4 patches") != std::string::npos);
  const auto manifest = dir.path() / "out" / "patches" / "train_manifest.csv";
  REQUIRE(fs::exists(manifest));
  const auto first = slurp(manifest);
  CHECK(read_manifest_csv(manifest, Split::Train).entries.size() == 4);
  CHECK(run_cli({"prepare", "--config", cfg}).code == 0);
  CHECK(slurp(manifest) == first);
}

TEST_CASE("prepare on an empty root fails") {
  TempDir dir("cli_empty");
  fs::create_directories(dir.path() / "data");
  const auto r = run_cli({"prepare", "--config", write_config(dir.path(), dir.path() / "data")});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("no scenes") != std::string::npos);
}

TEST_CASE("zero-epoch training writes a checkpoint and a header-only history") {
  TempDir dir("cli_train0");
  write_scene_at(dir.path() / "data", Split::Train, "a", 384, 2);
  const auto r = run_cli({"train", "--config", write_config(dir.path(), dir.path() / "data"), "--max-epochs", "0"});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir.path() / "out" / "best.ckpt"));
  CHECK(slurp(dir.path() / "out" / "history.csv") == "epoch,loss,lr\n");
}

TEST_CASE("training without ground truth is a data error") {
  TempDir dir("cli_nogt");
  write_scene_at(dir.path() / "data", Split::Train, "a", 384, 3);
  fs::remove_all(dir.path() / "data" / "train" / "gt");
  const auto r = run_cli({"train", "--config", write_config(dir.path(), dir.path() / "data"), "--max-epochs", "1"});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("ground truth") != std::string::npos);
}

TEST_CASE("predict, evaluate and their failure modes") {
  TempDir dir("cli_predict");
  const auto data = dir.path() / "data";
  write_scene_at(data, Split::Test, "LC08_t", 768, 4);
  const auto cfg = write_config(dir.path(), data);
  REQUIRE(run_cli({"train", "--config", cfg, "--max-epochs", "0"}).code == 0);

  auto r = run_cli({"predict", "--config", cfg, "--emit-prob"});
  REQUIRE(r.code == 0);
  const auto pred_dir = dir.path() / "out" / "predictions";
  const auto mask = read_mask_tiff(pred_dir / "LC08_t_mask.TIF");
  CHECK(mask.rows() == 768);
  CHECK(mask.cols() == 768);
  CHECK(((mask.array() == 0) || (mask.array() == 255)).all());
  const auto prob = read_float_tiff(pred_dir / "LC08_t_prob.TIF");
  CHECK(prob.rows() == 768);
  CHECK(prob.cols() == 768);
  CHECK(prob.minCoeff() >= 0.0f);
  CHECK(prob.maxCoeff() <= 1.0f);

  const auto first = slurp(pred_dir / "LC08_t_mask.TIF");
  REQUIRE(run_cli({"predict", "--config", cfg}).code == 0);
  CHECK(slurp(pred_dir / "LC08_t_mask.TIF") == first);

  r = run_cli({"evaluate", "--config", cfg});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir.path() / "out" / "report.csv"));
  CHECK(r.out.find("Jaccard") != std::string::npos);

  r = run_cli({"predict", "--config", cfg, "missing_scene"});
  CHECK(r.code == cli::kDataError);

  // A checkpoint from a five-level network does not load into three levels.
  const auto five = write_config(dir.path(), data,
                                 R"({"input_side": 192, "depth_schedule": [4, 8, 16, 32, 64]})", "five.json");
  REQUIRE(run_cli({"train", "--config", five, "--max-epochs", "0"}).code == 0);
  r = run_cli({"predict", "--config", cfg});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("5-level") != std::string::npos);
}

TEST_CASE("evaluate reports known counts") {
  TempDir dir("cli_eval");
  const auto data = dir.path() / "data";
  const auto cfg = write_config(dir.path(), data);
  const auto gt_path = layout_path(data, Split::Test, kGtName, "s");
  fs::create_directories(gt_path.parent_path());
  BinaryMask gt(1, 10), pred(1, 10);
  gt << 255, 255, 255, 255, 0, 0, 0, 0, 0, 0;
  pred << 255, 255, 255, 0, 0, 0, 0, 0, 0, 255;
  write_mask_tiff(gt_path, gt);

  auto r = run_cli({"evaluate", "--config", cfg});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("s") != std::string::npos);
  CHECK(r.err.find("no predictions") != std::string::npos);

  const auto pred_dir = dir.path() / "out" / "predictions";
  fs::create_directories(pred_dir);
  write_mask_tiff(pred_dir / "s_mask.TIF", pred);
  r = run_cli({"evaluate", "--config", cfg});
  CHECK(r.code == 0);
  const auto report = slurp(dir.path() / "out" / "report.txt");
  for (const char* v : {"60.00", "75.00", "83.33", "80.00"}) CHECK(report.find(v) != std::string::npos);

  write_mask_tiff(pred_dir / "s_mask.TIF", gt);
  r = run_cli({"evaluate", "--config", cfg});
  CHECK(r.code == 0);
  CHECK(r.out.find("100.00") != std::string::npos);
}

TEST_CASE("help lists the default hyperparameters") {
  const auto train = run_cli({"train", "--help"});
  CHECK(train.code == 0);
  for (const char* v : {"1e-4", "0.7", "15", "1e-9", "384", "192"}) CHECK(train.out.find(v) != std::string::npos);
  const auto predict = run_cli({"predict", "--help"});
  CHECK(predict.out.find("0.047") != std::string::npos);
  CHECK(run_cli({}).code == cli::kUsage);
  CHECK(run_cli({"train"}).code == cli::kUsage);
}

TEST_CASE("the installed binary runs") {
  const int status = std::system((std::string(CLOUDNET_CLI_PATH) + " --help > /dev/null").c_str());
  CHECK(status == 0);
}
