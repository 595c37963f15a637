#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wmbind/coupling.hpp"
#include "wmbind/tasks.hpp"

namespace wmbind {

struct LrPhase {
  std::size_t start_epoch = 0;
  double lr = 1e-4;
  friend bool operator==(const LrPhase&, const LrPhase&) = default;
};

struct TrainConfig {
  std::string experiment;
  std::string task = "first_order";
  std::size_t epochs = 10;
  std::size_t steps_per_epoch = 1000;
  std::vector<LrPhase> lr_schedule{{0, 1e-4}};
  std::uint64_t seed = 1;

  std::size_t brn_nodes = 1000;
  std::size_t brn_degree = 20;
  std::size_t interface_dim = 350;
  double forget_rate = 1.0 / 3.0;
  std::size_t controller_dim = 512;
  IvWiring iv_wiring = IvWiring::layer4;
  bool output_bias = false;
  BrnKind brn_kind = BrnKind::random;
  double rho = 0.9;
  double eps = 1e-8;

  std::size_t validation_steps = 100;
  std::size_t validation_every = 1;  // epochs; 0 disables
  bool exclude_warmup = false;
  /// Consecutive steps whose mean gradient forms one optimizer update.
  std::size_t batch_steps = 1;
  /// false: one training sequence is drawn once and replayed every epoch.
  bool resample_each_epoch = false;

  std::size_t test_steps = 50;
  std::optional<std::size_t> test_switch_period;

  /// Throws std::invalid_argument describing the first problem found.
  void validate() const;
  double lr_for_epoch(std::size_t epoch) const;
  TaskSpec task_spec() const { return TaskSpec::by_name(task); }
  ModelSpec model_spec() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct ValidationReport {
  Metric metric;
  /// Accuracy per recall segment (generalized task: lags 1..7).
  std::vector<double> lag_accuracy;
  /// Cue task: recall error and overall accuracy for cue 00 / 11 (NaN if absent).
  std::array<double, 2> cue_recall_error{};
  std::array<double, 2> cue_accuracy{};
  double mean_read_activation = 0.0;
  std::size_t scored_steps = 0;
};

/// Resets the model, runs `samples`, thresholds outputs at 1/2 and scores them.
/// Steps with t < max lag are skipped when exclude_warmup is set.
ValidationReport score_sequence(WmModel& model, const TaskSpec& task, std::span<const StepSample> samples,
                                bool exclude_warmup);

/// Thresholds `outputs` at 1/2 and scores them against the sample targets.
/// mean_read_activation is left at 0.
ValidationReport score_outputs(const TaskSpec& task, std::span<const StepSample> samples,
                               std::span<const std::vector<double>> outputs, bool exclude_warmup);

/// Scores a fresh n_steps stream drawn from `rng`.
ValidationReport validate(WmModel& model, const TaskSpec& task, std::size_t n_steps, RngStream rng,
                          bool exclude_warmup = false);

struct ValidationRow {
  std::size_t epoch = 0;
  std::size_t step = 0;  // training steps completed
  double lr = 0.0;
  ValidationReport report;
};

struct TestRun {
  std::vector<StepSample> samples;
  std::vector<std::vector<double>> outputs;
  IvTrace trace;
};

struct RunRecord {
  TrainConfig config;
  std::vector<double> train_loss;
  std::vector<double> lr_applied;
  std::vector<ValidationRow> validation;
  TestRun test;
  double wall_seconds = 0.0;
};

struct TrainResult {
  WmModel model;
  RunRecord record;
};

using ProgressFn = std::function<void(std::size_t epoch, const RunRecord&)>;

TrainResult train(const TrainConfig& cfg, const ProgressFn& progress = {});

/// Runs cfg.test_steps fresh steps on the trained model (cue task: blocked
/// cues when test_switch_period is set).
TestRun test_run(WmModel& model, const TrainConfig& cfg);

/// Median of the last `w` training losses.
double final_windowed_median(std::span<const double> loss, std::size_t w = 100);
/// Median of the last `w` losses of the given epoch.
double epoch_windowed_median(std::span<const double> loss, std::size_t steps_per_epoch, std::size_t epoch,
                             std::size_t w = 100);

void write_metrics_csv(std::ostream& os, const RunRecord& rec);
void write_outputs_csv(std::ostream& os, const TestRun& run);

}  // namespace wmbind
