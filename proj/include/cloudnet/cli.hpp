#pragma once

#include "cloudnet/config.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace cloudnet::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kRuntimeFailure = 3 };

inline constexpr const char* kDataRootEnv = "CLOUDNET_DATA_ROOT";

/// Maps a library error onto the process exit status.
ExitCode exit_code_for(Errc code);

struct PrepareSummary {
  std::size_t train_patches = 0;
  std::size_t test_patches = 0;
};

// Each command reads its inputs from `cfg` and reports on `out`; errors are thrown.
PrepareSummary cmd_prepare(const RunConfig& cfg, std::ostream& out);
void cmd_train(const RunConfig& cfg, const std::string& resume_from, std::ostream& out);
void cmd_predict(const RunConfig& cfg, const std::string& checkpoint, const std::vector<std::string>& scene_ids,
                 bool emit_prob, std::ostream& out);
/// Returns false when at least one scene failed to evaluate.
bool cmd_evaluate(const RunConfig& cfg, std::ostream& out);

/// Full command-line entry point; returns the exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cloudnet::cli
