#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace tlens::cli {

/// A required file that does not exist. Reported with exit status 2.
class MissingFileError : public InputError {
 public:
  explicit MissingFileError(std::filesystem::path path)
      : InputError("missing file: " + path.string()), path_(std::move(path)) {}
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct StageResult {
  std::vector<std::string> outputs;  // file names relative to the output directory
  Diagnostics diag;
};

StageResult run_ingest(const RunConfig& cfg);
StageResult run_fit(const RunConfig& cfg);
StageResult run_classify(const RunConfig& cfg);
StageResult run_scenario(const RunConfig& cfg);
StageResult run_pv(const RunConfig& cfg);
StageResult run_synth(const RunConfig& cfg);

/// Merges one stage's entry into `<out>/manifest.json`.
void record_manifest(const RunConfig& cfg, const std::string& stage, const StageResult& result,
                     double seconds);

}  // namespace tlens::cli
