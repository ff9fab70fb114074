#pragma once

#include "cloudnet/error.hpp"
#include "cloudnet/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cloudnet {

/// Cloud is the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Throws ShapeMismatch or NonBinaryInput.
ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt);

/// Ratios in [0, 1]; nullopt where the denominator is zero.
struct MetricsReport {
  std::optional<double> jaccard;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> specificity;
  std::optional<double> overall_accuracy;
};

MetricsReport metrics(const ConfusionCounts& c);

/// "Jaccard 78.50  Precision 91.23  Recall 84.85  Specificity 98.67  Overall 96.48"
std::string format_report_row(const MetricsReport& r);

struct SceneEvaluation {
  std::string scene_id;
  ConfusionCounts counts;
  MetricsReport report;
};

struct TestsetEvaluation {
  std::vector<SceneEvaluation> scenes;
  ConfusionCounts global_counts;
  MetricsReport global;          // from pooled counts
  MetricsReport mean_of_scenes;  // over scenes where each metric is defined
  std::vector<std::string> failures;
};

/// Pairs `<id>_mask.TIF` in `pred_dir` with `gt_<id>.TIF` in `gt_dir`.
/// A prediction without ground truth, or an empty prediction set, throws;
/// per-scene decode or shape errors are collected in `failures`.
TestsetEvaluation evaluate_testset(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir);

/// Aligned text table with Jaccard, Precision, Recall, Specificity, Overall Accuracy
/// columns in percent, two decimals.
std::string render_table(const TestsetEvaluation& eval, bool with_reference = false);
std::string render_csv(const TestsetEvaluation& eval);

struct ReferenceRow {
  std::string method;
  double jaccard, precision, recall, specificity, overall;
};
/// Published comparison figures (percent) for the 38-Cloud test set.
const std::vector<ReferenceRow>& reference_rows();

}  // namespace cloudnet
