#include "cloudnet/evaluation.hpp"

#include "cloudnet/error.hpp"
#include "cloudnet/raster_io.hpp"

#include <cstdio>
#include <map>
#include <sstream>

namespace cloudnet {

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw Error(Errc::ShapeMismatch, "prediction is " + std::to_string(pred.rows()) + "x" +
                                         std::to_string(pred.cols()) + ", ground truth is " +
                                         std::to_string(gt.rows()) + "x" + std::to_string(gt.cols()));
  }
  if (!is_binary(pred) || !is_binary(gt)) throw Error(Errc::NonBinaryInput, "masks must contain only 0 and 1");
  const auto p = pred.array() == 1;
  const auto g = gt.array() == 1;
  ConfusionCounts c;
  c.tp = std::uint64_t((p && g).count());
  c.fp = std::uint64_t((p && !g).count());
  c.fn = std::uint64_t((!p && g).count());
  c.tn = std::uint64_t(pred.size()) - c.tp - c.fp - c.fn;
  return c;
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return double(num) / double(den);
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
  return buf;
}

std::string csv_value(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

MetricsReport metrics(const ConfusionCounts& c) {
  MetricsReport r;
  r.jaccard = ratio(c.tp, c.tp + c.fn + c.fp);
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.specificity = ratio(c.tn, c.tn + c.fp);
  r.overall_accuracy = ratio(c.tp + c.tn, c.total());
  return r;
}

std::string format_report_row(const MetricsReport& r) {
  return "Jaccard " + percent(r.jaccard) + "  Precision " + percent(r.precision) + "  Recall " + percent(r.recall) +
         "  Specificity " + percent(r.specificity) + "  Overall " + percent(r.overall_accuracy);
}

TestsetEvaluation evaluate_testset(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(gt_dir)) throw Error(Errc::MissingGT, "ground-truth directory " + gt_dir.string() + " not found");

  std::map<std::string, fs::path> preds, gts;
  // A missing prediction directory is reported below with the expected scene ids.
  const auto pred_items = fs::is_directory(pred_dir) ? fs::directory_iterator(pred_dir) : fs::directory_iterator();
  for (const auto& item : pred_items) {
    const std::string stem = item.path().stem().string();
    const std::string suffix = "_mask";
    if (item.path().extension() == ".TIF" && stem.size() > suffix.size() &&
        stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
      preds.emplace(stem.substr(0, stem.size() - suffix.size()), item.path());
    }
  }
  for (const auto& item : fs::directory_iterator(gt_dir)) {
    const std::string stem = item.path().stem().string();
    if (item.path().extension() == ".TIF" && stem.rfind("gt_", 0) == 0) gts.emplace(stem.substr(3), item.path());
  }

  if (preds.empty()) {
    std::string missing;
    for (const auto& [id, path] : gts) missing += (missing.empty() ? "" : ", ") + id;
    throw Error(Errc::MissingPrediction, "no predictions in " + pred_dir.string() +
                                             (missing.empty() ? std::string() : "; missing scenes: " + missing));
  }
  std::string orphans;
  for (const auto& [id, path] : preds) {
    if (!gts.count(id)) orphans += (orphans.empty() ? "" : ", ") + id;
  }
  if (!orphans.empty()) throw Error(Errc::MissingGT, "no ground truth for predicted scenes: " + orphans);

  TestsetEvaluation out;
  for (const auto& [id, path] : preds) {
    try {
      const BinaryMask pred = (read_mask_tiff(path).array() != 0).cast<std::uint8_t>();
      const BinaryMask gt = (read_mask_tiff(gts.at(id)).array() != 0).cast<std::uint8_t>();
      SceneEvaluation s{id, confusion(pred, gt), {}};
      s.report = metrics(s.counts);
      out.global_counts += s.counts;
      out.scenes.push_back(std::move(s));
    } catch (const Error& e) {
      out.failures.push_back(id + ": " + e.what());
    }
  }
  out.global = metrics(out.global_counts);

  auto mean_of = [&](auto member) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const auto& s : out.scenes) {
      if (const auto& v = s.report.*member) {
        sum += *v;
        ++n;
      }
    }
    return n ? std::optional<double>(sum / n) : std::nullopt;
  };
  out.mean_of_scenes.jaccard = mean_of(&MetricsReport::jaccard);
  out.mean_of_scenes.precision = mean_of(&MetricsReport::precision);
  out.mean_of_scenes.recall = mean_of(&MetricsReport::recall);
  out.mean_of_scenes.specificity = mean_of(&MetricsReport::specificity);
  out.mean_of_scenes.overall_accuracy = mean_of(&MetricsReport::overall_accuracy);
  return out;
}

const std::vector<ReferenceRow>& reference_rows() {
  static const std::vector<ReferenceRow> rows{
      {"FCN (reference)", 72.17, 84.59, 81.37, 98.45, 95.23},
      {"Fmask (reference)", 75.16, 77.71, 97.22, 93.96, 94.89},
      {"This network (reference)", 78.50, 91.23, 84.85, 98.67, 96.48},
  };
  return rows;
}

std::string render_table(const TestsetEvaluation& eval, bool with_reference) {
  std::size_t name_w = 24;
  for (const auto& s : eval.scenes) name_w = std::max(name_w, s.scene_id.size() + 2);
  std::ostringstream out;
  char buf[256];
  auto row = [&](const std::string& name, const std::string& j, const std::string& p, const std::string& r,
                 const std::string& s, const std::string& o) {
    std::snprintf(buf, sizeof buf, "%-*s %9s %10s %8s %12s %17s\n", int(name_w), name.c_str(), j.c_str(), p.c_str(),
                  r.c_str(), s.c_str(), o.c_str());
    out << buf;
  };
  auto report_row = [&](const std::string& name, const MetricsReport& m) {
    row(name, percent(m.jaccard), percent(m.precision), percent(m.recall), percent(m.specificity),
        percent(m.overall_accuracy));
  };
  row("Scene", "Jaccard", "Precision", "Recall", "Specificity", "Overall Accuracy");
  for (const auto& s : eval.scenes) report_row(s.scene_id, s.report);
  out << std::string(name_w + 62, '-') << '\n';
  report_row("Global (pooled pixels)", eval.global);
  report_row("Mean of scenes", eval.mean_of_scenes);
  if (with_reference) {
    out << std::string(name_w + 62, '-') << '\n';
    for (const auto& r : reference_rows()) {
      auto f = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.2f", v);
        return std::string(b);
      };
      row(r.method, f(r.jaccard), f(r.precision), f(r.recall), f(r.specificity), f(r.overall));
    }
  }
  for (const auto& f : eval.failures) out << "FAILED " << f << '\n';
  return out.str();
}

std::string render_csv(const TestsetEvaluation& eval) {
  std::ostringstream out;
  out << "scope,scene_id,tp,tn,fp,fn,jaccard,precision,recall,specificity,overall_accuracy\n";
  auto line = [&](const std::string& scope, const std::string& id, const ConfusionCounts& c, const MetricsReport& m) {
    out << scope << ',' << id << ',' << c.tp << ',' << c.tn << ',' << c.fp << ',' << c.fn << ','
        << csv_value(m.jaccard) << ',' << csv_value(m.precision) << ',' << csv_value(m.recall) << ','
        << csv_value(m.specificity) << ',' << csv_value(m.overall_accuracy) << '\n';
  };
  for (const auto& s : eval.scenes) line("scene", s.scene_id, s.counts, s.report);
  line("global", "", eval.global_counts, eval.global);
  line("mean", "", {}, eval.mean_of_scenes);
  return out.str();
}

}  // namespace cloudnet
