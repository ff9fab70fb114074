#include "cloudnet/cli.hpp"

#include "cloudnet/checkpoint.hpp"
#include "cloudnet/evaluation.hpp"
#include "cloudnet/inference.hpp"
#include "cloudnet/raster_io.hpp"
#include "cloudnet/tiling.hpp"
#include "cloudnet/trainer.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>

namespace cloudnet::cli {

namespace fs = std::filesystem;
using Real = float;

ExitCode exit_code_for(Errc code) {
  switch (code) {
    case Errc::ConfigError:
      return kUsage;
    case Errc::MissingBand:
    case Errc::DimensionMismatch:
    case Errc::DecodeError:
    case Errc::LayoutError:
    case Errc::MissingPatch:
    case Errc::DuplicatePatch:
    case Errc::ShapeMismatch:
    case Errc::DomainError:
    case Errc::EmptyBatch:
    case Errc::EmptyDataset:
    case Errc::NonBinaryInput:
    case Errc::MissingGT:
    case Errc::MissingPrediction:
    case Errc::CheckpointMismatch:
      return kDataError;
    default:
      return kRuntimeFailure;
  }
}

namespace {

fs::path prepared_root(const RunConfig& cfg) { return cfg.paths.output_dir / "patches"; }
fs::path manifest_path(const RunConfig& cfg, Split s) {
  return prepared_root(cfg) / (std::string(split_name(s)) + "_manifest.csv");
}
fs::path prediction_dir(const RunConfig& cfg) { return cfg.paths.output_dir / "predictions"; }

void require_data_root(const RunConfig& cfg) {
  if (cfg.paths.data_root.empty()) {
    throw Error(Errc::ConfigError, std::string("no data root: set paths.data_root or ") + kDataRootEnv);
  }
  if (!fs::is_directory(cfg.paths.data_root)) {
    throw Error(Errc::LayoutError, "data root " + cfg.paths.data_root.string() + " does not exist");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_history(const fs::path& path, const std::vector<EpochRecord>& history) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << "epoch,loss,lr\n";
  for (const auto& r : history) out << r.epoch << ',' << format_double(r.loss) << ',' << format_double(r.lr) << '\n';
}

std::size_t prepare_split(const RunConfig& cfg, Split split, std::ostream& out) {
  const DatasetManifest raw = build_manifest(cfg.paths.data_root, split);
  const fs::path dest = prepared_root(cfg);
  DatasetManifest prepared;
  prepared.split = split;
  for (const auto& e : raw.entries) {
    const SpectralScene scene = load_scene({e.bands.begin(), e.bands.end()}, e.scene_id);
    std::optional<GroundTruthMask> gt;
    if (e.gt) gt = load_gt(*e.gt, scene);
    auto [grid, patches] = cut_patches(scene, cfg.inference.patch_size);
    std::vector<Tile<std::uint8_t>> gt_tiles;
    if (gt) gt_tiles = cut_raster(gt->mask, grid);
    for (std::size_t i = 0; i < patches.size(); ++i) {
      ManifestEntry pe;
      pe.scene_id = patch_name(patches[i].row, patches[i].col, scene.scene_id);
      for (int b = 0; b < kBandCount; ++b) {
        pe.bands[b] = layout_path(dest, split, kBandNames[b], pe.scene_id);
        write_band_tiff(pe.bands[b], patches[i].bands[b]);
      }
      if (gt) {
        pe.gt = layout_path(dest, split, kGtName, pe.scene_id);
        write_mask_tiff(*pe.gt, (gt_tiles[i].pixels.array() * std::uint8_t(255)).matrix());
      }
      prepared.entries.push_back(std::move(pe));
    }
  }
  prepared.patch_count = prepared.entries.size();
  if (!raw.entries.empty()) write_manifest_csv(manifest_path(cfg, split), prepared);
  out << split_name(split) << ": " << raw.entries.size() << " scenes -> " << prepared.patch_count << " patches\n";
  return prepared.patch_count;
}

}  // namespace

PrepareSummary cmd_prepare(const RunConfig& cfg, std::ostream& out) {
  require_data_root(cfg);
  PrepareSummary s;
  s.train_patches = prepare_split(cfg, Split::Train, out);
  s.test_patches = prepare_split(cfg, Split::Test, out);
  if (s.train_patches + s.test_patches == 0) {
    throw Error(Errc::LayoutError, "no scenes found under " + cfg.paths.data_root.string() +
                                       " (expected <root>/{train,test}/{blue,green,red,nir,gt}/)");
  }
  return s;
}

void cmd_train(const RunConfig& cfg, const std::string& resume_from, std::ostream& out) {
  cfg.validate();
  DatasetManifest manifest;
  if (fs::exists(manifest_path(cfg, Split::Train))) {
    manifest = read_manifest_csv(manifest_path(cfg, Split::Train), Split::Train);
  } else {
    require_data_root(cfg);
    manifest = build_manifest(cfg.paths.data_root, Split::Train);
  }

  TrainState<Real> state = resume_from.empty() ? initial_state<Real>(cfg.network, cfg.train)
                                               : load_train_state<Real>(resume_from, cfg.network);
  std::vector<TrainingSample<Real>> samples;
  if (cfg.train.max_epochs > state.epoch) {
    samples = load_training_samples<Real>(manifest, cfg.network.input_side, cfg.inference.patch_size);
    out << "training on " << samples.size() << " patches from " << manifest.entries.size() << " entries\n";
  }

  const fs::path best_path = cfg.checkpoint_path();
  const fs::path last_path = cfg.paths.output_dir / "last.ckpt";
  const fs::path history_path = cfg.paths.output_dir / "history.csv";
  TrainHooks<Real> hooks;
  hooks.on_epoch_end = [&](const TrainState<Real>& s, bool improved) {
    const auto& r = s.history.back();
    char buf[96];
    std::snprintf(buf, sizeof buf, "epoch %d loss %.6f lr %.3g%s\n", r.epoch, r.loss, r.lr, improved ? " *" : "");
    out << buf << std::flush;
    if (improved) save_checkpoint(best_path, s);
  };

  TrainResult<Real> result;
  if (cfg.train.max_epochs > state.epoch) {
    result = train_samples(samples, std::move(state), cfg.train, cfg.augment, hooks);
  } else {
    result.final_state = state;
    result.best_state = std::move(state);
  }
  save_checkpoint(best_path, result.best_state);
  save_checkpoint(last_path, result.final_state);
  write_history(history_path, result.final_state.history);
  out << "best checkpoint: " << best_path.string() << " (epoch " << result.best_state.epoch << ")\n";
}

void cmd_predict(const RunConfig& cfg, const std::string& checkpoint, const std::vector<std::string>& scene_ids,
                 bool emit_prob, std::ostream& out) {
  cfg.validate();
  require_data_root(cfg);
  const fs::path ckpt = checkpoint.empty() ? cfg.checkpoint_path() : fs::path(checkpoint);
  if (!fs::exists(ckpt)) throw Error(Errc::CheckpointMismatch, "checkpoint " + ckpt.string() + " not found");
  const Network<Real> net = load_network<Real>(ckpt, cfg.network);

  const DatasetManifest manifest = build_manifest(cfg.paths.data_root, Split::Test);
  const std::set<std::string> wanted(scene_ids.begin(), scene_ids.end());
  std::set<std::string> found;
  const fs::path dir = prediction_dir(cfg);
  fs::create_directories(dir);
  for (const auto& e : manifest.entries) {
    if (!wanted.empty() && !wanted.count(e.scene_id)) continue;
    found.insert(e.scene_id);
    const SpectralScene scene = load_scene({e.bands.begin(), e.bands.end()}, e.scene_id);
    const auto pred = predict_scene_detailed(net, scene, cfg.inference, emit_prob);
    write_mask_tiff(dir / (e.scene_id + "_mask.TIF"), (pred.mask.array() * std::uint8_t(255)).matrix());
    if (emit_prob) write_float_tiff(dir / (e.scene_id + "_prob.TIF"), *pred.probability);
    out << e.scene_id << ": " << scene.height() << "x" << scene.width() << " mask written\n";
  }
  for (const auto& id : wanted) {
    if (!found.count(id)) throw Error(Errc::LayoutError, "scene " + id + " not found in test split");
  }
  if (found.empty()) throw Error(Errc::EmptyDataset, "no test scenes to predict");
}

bool cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  require_data_root(cfg);
  const auto eval = evaluate_testset(prediction_dir(cfg), cfg.paths.data_root / "test" / "gt");
  fs::create_directories(cfg.paths.output_dir);
  const std::string table = render_table(eval);
  {
    std::ofstream csv(cfg.paths.output_dir / "report.csv", std::ios::trunc);
    csv << render_csv(eval);
    std::ofstream txt(cfg.paths.output_dir / "report.txt", std::ios::trunc);
    txt << table;
  }
  out << table;
  return eval.failures.empty();
}

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_epochs;
  std::string checkpoint;
  bool emit_prob = false;
  std::vector<std::string> scenes;
  std::optional<double> lr, decay, lr_floor, threshold;
  std::optional<int> patience, patch_size, input_side;
};

RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg = load_run_config(o.config);
  if (o.seed) cfg.apply_seed(*o.seed);
  if (o.max_epochs) cfg.train.max_epochs = *o.max_epochs;
  if (o.lr) cfg.train.initial_lr = *o.lr;
  if (o.decay) cfg.train.decay_rate = *o.decay;
  if (o.lr_floor) cfg.train.lr_floor = *o.lr_floor;
  if (o.patience) cfg.train.patience = *o.patience;
  if (o.threshold) cfg.inference.threshold = *o.threshold;
  if (o.patch_size) cfg.inference.patch_size = *o.patch_size;
  if (o.input_side) {
    cfg.network.input_side = *o.input_side;
    cfg.inference.model_input_side = *o.input_side;
  }
  if (const char* env = std::getenv(kDataRootEnv); env && *env) cfg.paths.data_root = env;
  cfg.validate();
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cloud segmentation of 4-band Landsat 8 scenes: prepare, train, predict, evaluate"};
  app.require_subcommand(1);
  Overrides o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the configured seed");
  };
  auto schedule_flags = [&](CLI::App* sub) {
    sub->add_option("--max-epochs", o.max_epochs, "Number of epochs to train");
    sub->add_option("--lr", o.lr, "Initial learning rate")->default_str("1e-4");
    sub->add_option("--decay-rate", o.decay, "Plateau decay factor")->default_str("0.7");
    sub->add_option("--patience", o.patience, "Non-improving epochs before a decay")->default_str("15");
    sub->add_option("--lr-floor", o.lr_floor, "Learning rate at which decay stops")->default_str("1e-9");
  };
  auto tiling_flags = [&](CLI::App* sub) {
    sub->add_option("--patch-size", o.patch_size, "Scene tile side in pixels")->default_str("384");
    sub->add_option("--input-side", o.input_side, "Network input side in pixels")->default_str("192");
  };

  auto* prepare = app.add_subcommand("prepare", "Cut raw scenes into patches and write manifests");
  common(prepare);
  tiling_flags(prepare);

  auto* train = app.add_subcommand("train", "Train the network; writes best/last checkpoints and history.csv");
  common(train);
  schedule_flags(train);
  tiling_flags(train);
  train->add_option("--checkpoint", o.checkpoint, "Resume from this checkpoint");

  auto* predict = app.add_subcommand("predict", "Write binary cloud masks for test scenes");
  common(predict);
  tiling_flags(predict);
  predict->add_option("--checkpoint", o.checkpoint, "Checkpoint to load (default: configured best checkpoint)");
  predict->add_option("--threshold", o.threshold, "Cloud probability threshold")->default_str("0.047");
  predict->add_flag("--emit-prob", o.emit_prob, "Also write per-scene probability maps");
  predict->add_option("scenes", o.scenes, "Scene ids to predict (default: all test scenes)");

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  common(evaluate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    const RunConfig cfg = resolve_config(o);
    if (*prepare) {
      cmd_prepare(cfg, out);
    } else if (*train) {
      cmd_train(cfg, o.checkpoint, out);
    } else if (*predict) {
      cmd_predict(cfg, o.checkpoint, o.scenes, o.emit_prob, out);
    } else if (*evaluate) {
      if (!cmd_evaluate(cfg, out)) {
        err << "error: some scenes failed to evaluate\n";
        return kDataError;
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}

}  // namespace cloudnet::cli
