#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "recbench/evaluator.hpp"
#include "recbench/models/checkpoint.hpp"
#include "recbench/runner/config.hpp"

namespace recbench {

struct PreparedData {
  Dataset dataset;
  SplitResult split;
  EvalPlan plan;
  // Human-readable record of each preprocessing step.
  std::vector<std::string> log;
};

// load -> filters in configured order -> remap -> fill_nan -> label ->
// normalize -> split.
PreparedData prepare_data(const Config& cfg);

// Strictly-greater improvement with a stall counter.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  // Records a validation value; returns true on a new best.
  bool update(double value);
  bool should_stop() const { return stalls_ >= patience_; }
  std::optional<double> best() const { return best_; }
  std::size_t stalls() const { return stalls_; }
  void restore(std::optional<double> best, std::size_t stalls);

 private:
  std::size_t patience_;
  std::optional<double> best_;
  std::size_t stalls_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double valid = 0.0;
  bool improved = false;
};

enum class LoopExit { max_epochs, early_stopped, interrupted };

struct LoopHooks {
  // Trains one epoch, returns its loss.
  std::function<double()> train_epoch;
  // Validation metric after the epoch.
  std::function<double()> validate;
  // Called after every epoch with the epoch number and whether it improved.
  std::function<void(const EpochRecord&, bool finished)> on_epoch_end;
};

// Epochs start + 1 .. max_epochs. Stops early once `stopper` reports
// patience exhausted, or after `interrupt_after` (0: never) to simulate a
// crash; `on_epoch_end` still sees that epoch.
LoopExit run_training_loop(std::size_t start_epoch, std::size_t max_epochs,
                           std::size_t interrupt_after, EarlyStopping& stopper,
                           const LoopHooks& hooks, std::vector<EpochRecord>* history = nullptr);

struct RunResult {
  std::filesystem::path dir;
  std::string config_hash;
  bool finished = false;
  LoopExit exit = LoopExit::max_epochs;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::optional<double> best_valid;
  std::vector<EpochRecord> history;
  // Present once the run finished.
  std::optional<MetricReport> valid_report;
  std::optional<MetricReport> test_report;
  ModelState best_state;
};

// Output layout inside the run directory.
inline constexpr const char* kBestCheckpoint = "best.ckpt";
inline constexpr const char* kLatestCheckpoint = "latest.ckpt";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kValidJson = "valid.json";
inline constexpr const char* kRunLog = "run.log";

RunResult run_experiment(const Config& cfg);

// Continues from a latest checkpoint. When `current` is given its hash must
// match the stored one unless `allow_mismatch`; otherwise the stored config
// is used. A finished run is not retrained; its report is re-emitted.
RunResult resume_experiment(const std::filesystem::path& checkpoint,
                            const std::optional<Config>& current = std::nullopt,
                            bool allow_mismatch = false);

// Report file body: a header with the config hash and seed, then the table.
std::string report_text(const MetricReport& report, const Config& cfg);

}  // namespace recbench
