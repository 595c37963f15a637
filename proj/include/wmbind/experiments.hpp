#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmbind/harness.hpp"

namespace wmbind {

/// first_order, generalized, second_order, third_order, fourth_order,
/// cue_based, ablation_iv_layer3, ablation_lattice, impulse_response.
const std::vector<std::string>& experiment_names();

/// Preconfigured run for an experiment; unknown names throw with the valid list.
TrainConfig default_config(const std::string& name);

struct ExperimentOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> steps_per_epoch;
  std::optional<nlohmann::json> config;  // overrides applied before the flags above
  std::filesystem::path out = "out";
  bool write_snapshot = true;
  bool verbose = false;
};

struct ExperimentResult {
  TrainConfig config;
  RunRecord record;
  std::filesystem::path dir;
  std::string summary;
};

/// Resolves the config (defaults, then file overrides, then flags), trains,
/// and writes out/<experiment>/<seed>/{config.json, metrics.csv, iv_trace.csv,
/// outputs.csv, snapshot.json, *.svg}.
ExperimentResult run_experiment(const std::string& name, const ExperimentOptions& opts = {});

TrainConfig resolve_config(const std::string& name, const ExperimentOptions& opts);

/// Writes iv_read.svg / iv_write.svg (IV position x step) for a trace.
void emit_iv_heatmaps(const IvTrace& trace, const std::filesystem::path& dir);

/// Matrices with one column per step: raw outputs, thresholded outputs,
/// targets, and the thresholded error mask.
struct OutputMatrices {
  Matrix raw;
  Matrix thresholded;
  Matrix target;
  Matrix errors;
};
OutputMatrices output_matrices(const TestRun& run);

}  // namespace wmbind
