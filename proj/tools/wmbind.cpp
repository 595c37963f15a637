// wmbind: train and inspect the hybrid working-memory model.
//
//   wmbind run --experiment <name> [--seed N] [--out DIR] [--config FILE]
//   wmbind validate --snapshot FILE --task <name> --steps N
//   wmbind trace --snapshot FILE --steps N
//   wmbind list

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wmbind/experiments.hpp"
#include "wmbind/format.hpp"
#include "wmbind/kernels.hpp"
#include "wmbind/snapshot.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void print_report(const wmbind::ValidationReport& r) {
  using wmbind::format_real;
  std::cout << "steps=" << r.scored_steps << " mse=" << format_real(r.metric.mse)
            << " accuracy=" << format_real(r.metric.hamming_accuracy)
            << " recall_error=" << format_real(r.metric.recall_error)
            << " mean_read=" << format_real(r.mean_read_activation) << '\n';
  if (r.lag_accuracy.size() > 1) {
    std::cout << "lag_accuracy";
    for (std::size_t k = 0; k < r.lag_accuracy.size(); ++k) std::cout << ' ' << k + 1 << ':' << format_real(r.lag_accuracy[k]);
    std::cout << '\n';
  }
  for (int c = 0; c < 2; ++c)
    if (!std::isnan(r.cue_accuracy[c]))
      std::cout << "cue " << (c ? "11" : "00") << " accuracy=" << format_real(r.cue_accuracy[c])
                << " recall_error=" << format_real(r.cue_recall_error[c]) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid working-memory model: controller + balanced random network"};
  app.require_subcommand(1);

  std::string experiment, out = "out", config_file;
  std::uint64_t seed = 0;
  std::size_t epochs = 0, spe = 0;
  bool verbose = false, no_snapshot = false;
  auto* run = app.add_subcommand("run", "Run a preconfigured experiment and write its artifacts");
  run->add_option("--experiment", experiment, "Experiment name (see `wmbind list`)")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Root seed");
  run->add_option("--out", out, "Output root directory")->capture_default_str();
  run->add_option("--config", config_file, "JSON file overriding TrainConfig fields")->check(CLI::ExistingFile);
  auto* epochs_opt = run->add_option("--epochs", epochs, "Override the number of epochs");
  auto* spe_opt = run->add_option("--steps-per-epoch", spe, "Override steps per epoch");
  run->add_flag("--no-snapshot", no_snapshot, "Skip writing snapshot.json");
  run->add_flag("-v,--verbose", verbose, "Print per-epoch progress to stderr");

  std::string snap, task;
  std::size_t steps = 100;
  std::uint64_t vseed = 12345;
  bool exclude_warmup = false;
  auto* val = app.add_subcommand("validate", "Score a saved model on a fresh task stream");
  val->add_option("--snapshot", snap, "snapshot.json")->required()->check(CLI::ExistingFile);
  val->add_option("--task", task, "Task name")->required();
  val->add_option("--steps", steps, "Number of steps")->capture_default_str();
  val->add_option("--seed", vseed, "Stream seed")->capture_default_str();
  val->add_flag("--exclude-warmup", exclude_warmup, "Do not score steps before the longest lag");

  std::string tsnap, tout = ".", ttask;
  std::size_t tsteps = 50;
  std::uint64_t tseed = 12345;
  auto* trace = app.add_subcommand("trace", "Run a saved model and emit interface-vector trace data");
  trace->add_option("--snapshot", tsnap, "snapshot.json")->required()->check(CLI::ExistingFile);
  trace->add_option("--steps", tsteps, "Number of steps")->capture_default_str();
  trace->add_option("--task", ttask, "Task driving the inputs (default: the snapshot's task)");
  trace->add_option("--seed", tseed, "Stream seed")->capture_default_str();
  trace->add_option("--out", tout, "Directory for iv_trace.csv and heatmaps")->capture_default_str();

  auto* list = app.add_subcommand("list", "List experiments and their default configs");

  std::string backend;
  app.add_option("--kernels", backend, "Force a kernel backend (scalar, avx2, neon)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!backend.empty()) {
      bool found = false;
      for (auto b : wmbind::kernels::available_backends())
        if (wmbind::kernels::name(b) == backend) {
          wmbind::kernels::select(b);
          found = true;
        }
      if (!found) throw std::invalid_argument("kernel backend '" + backend + "' is not available");
    }

    if (*run) {
      wmbind::ExperimentOptions opts;
      if (*seed_opt) opts.seed = seed;
      if (*epochs_opt) opts.epochs = epochs;
      if (*spe_opt) opts.steps_per_epoch = spe;
      if (!config_file.empty()) opts.config = nlohmann::json::parse(slurp(config_file));
      opts.out = out;
      opts.write_snapshot = !no_snapshot;
      opts.verbose = verbose;
      wmbind::run_experiment(experiment, opts);
    } else if (*val) {
      auto restored = wmbind::restore(slurp(snap));
      const auto spec = wmbind::TaskSpec::by_name(task);
      print_report(wmbind::validate(restored.model, spec, steps, wmbind::RngStream(vseed), exclude_warmup));
    } else if (*trace) {
      auto restored = wmbind::restore(slurp(tsnap));
      const auto spec = wmbind::TaskSpec::by_name(ttask.empty() ? restored.config.task : ttask);
      auto samples = wmbind::TaskStream(spec, wmbind::RngStream(tseed)).take(tsteps);
      std::vector<wmbind::BitVector> inputs;
      for (const auto& s : samples) inputs.push_back(s.input);
      wmbind::reset(restored.model);
      auto seq = wmbind::run_sequence(restored.model, inputs);
      std::filesystem::create_directories(tout);
      std::ofstream csv(std::filesystem::path(tout) / "iv_trace.csv", std::ios::binary);
      wmbind::write_iv_trace_csv(csv, seq.trace);
      wmbind::emit_iv_heatmaps(seq.trace, tout);
      std::cout << "wrote " << seq.trace.size() << " steps to " << tout << '\n';
    } else if (*list) {
      for (const auto& name : wmbind::experiment_names()) {
        std::cout << name << '\n' << wmbind::config_to_json(wmbind::default_config(name)).dump(2) << "\n\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "wmbind: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
