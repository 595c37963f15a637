#include "wmbind/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "wmbind/format.hpp"
#include "wmbind/heatmap.hpp"
#include "wmbind/snapshot.hpp"

namespace wmbind {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  write_text(path, os.str());
}

ExperimentResult run_impulse(const TrainConfig& cfg, const fs::path& dir) {
  RngStream root(cfg.seed);
  RngStream brn_rng = root.fork("model").fork("brn");
  const BrnNet net = cfg.brn_kind == BrnKind::random
                         ? build_random(cfg.brn_nodes, cfg.brn_degree, brn_rng, cfg.forget_rate)
                         : build_lattice(cfg.brn_nodes, cfg.brn_degree, cfg.forget_rate);
  RngStream pat_rng = root.fork("impulse-pattern");
  std::vector<double> pattern(net.n);
  for (auto& v : pattern) v = pat_rng.uniform();
  const std::size_t steps = std::max<std::size_t>(cfg.test_steps, 1);
  const Matrix single = impulse_trace(net, ImpulseMode::single_shot, pattern, steps);
  const Matrix rep = impulse_trace(net, ImpulseMode::repetitive, pattern, steps);

  auto stats = [](std::span<const double> row) {
    double sum = 0.0, mx = 0.0;
    for (double v : row) {
      sum += v;
      mx = std::max(mx, v);
    }
    return std::pair{sum / static_cast<double>(row.size()), mx};
  };
  write_stream(dir / "impulse.csv", [&](std::ostream& os) {
    os << "step,mode,mean,max\n";
    for (std::size_t t = 0; t < steps; ++t) {
      const auto [m1, x1] = stats(single.row(t));
      os << t + 1 << ",single_shot," << format_real(m1) << ',' << format_real(x1) << '\n';
    }
    for (std::size_t t = 0; t < steps; ++t) {
      const auto [m2, x2] = stats(rep.row(t));
      os << t + 1 << ",repetitive," << format_real(m2) << ',' << format_real(x2) << '\n';
    }
  });
  // Node x step views of the first 100 nodes.
  const std::size_t shown = std::min<std::size_t>(100, net.n);
  auto view = [&](const Matrix& tr) {
    Matrix v(shown, steps);
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t j = 0; j < shown; ++j) v(j, t) = tr(t, j);
    return v;
  };
  emit_heatmap(view(single), dir / "impulse_single_shot.svg", {.auto_range = true, .title = "single-shot impulse"});
  emit_heatmap(view(rep), dir / "impulse_repetitive.svg", {.auto_range = true, .title = "repetitive firing"});

  ExperimentResult res;
  res.config = cfg;
  res.record.config = cfg;
  std::ostringstream s;
  s << "impulse_response seed=" << cfg.seed << " single_shot mean(step1)=" << format_real(stats(single.row(0)).first)
    << " mean(step" << steps << ")=" << format_real(stats(single.row(steps - 1)).first) << " repetitive max(step"
    << steps << ")=" << format_real(stats(rep.row(steps - 1)).second);
  res.summary = s.str();
  return res;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"first_order",       "generalized",        "second_order",
                                              "third_order",       "fourth_order",       "cue_based",
                                              "ablation_iv_layer3", "ablation_lattice", "impulse_response"};
  return names;
}

TrainConfig default_config(const std::string& name) {
  TrainConfig c;
  c.experiment = name;
  const std::vector<LrPhase> three_phase{{0, 1e-4}, {5, 1e-5}, {15, 1e-6}};
  if (name == "first_order") {
    c.task = "first_order";
    c.epochs = 10;
    c.steps_per_epoch = 1000;
    c.lr_schedule = {{0, 1e-4}, {5, 1e-5}};
    c.test_steps = 20;
  } else if (name == "generalized" || name == "ablation_iv_layer3") {
    c.task = "generalized";
    c.epochs = 100;
    c.steps_per_epoch = 400;
    c.lr_schedule = {{0, 1e-4}, {50, 1e-5}};
    c.test_steps = 50;
    if (name == "ablation_iv_layer3") c.iv_wiring = IvWiring::layer3;
  } else if (name == "second_order" || name == "third_order" || name == "fourth_order" ||
             name == "ablation_lattice") {
    c.task = name == "ablation_lattice" ? "second_order" : name;
    c.epochs = 20;
    c.steps_per_epoch = 2000;
    c.lr_schedule = three_phase;
    c.test_steps = 20;
    if (name == "ablation_lattice") {
      c.brn_kind = BrnKind::lattice;
      c.test_steps = 50;
    }
  } else if (name == "cue_based") {
    c.task = "cue_based";
    c.epochs = 20;
    c.steps_per_epoch = 3000;
    c.lr_schedule = three_phase;
    c.validation_steps = 400;
    c.test_steps = 40;
    c.test_switch_period = 5;
  } else if (name == "impulse_response") {
    c.task = "first_order";
    c.epochs = 0;
    c.validation_every = 0;
    c.test_steps = 100;
  } else {
    std::string valid;
    for (const auto& n : experiment_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown experiment '" + name + "'; valid names: " + valid);
  }
  return c;
}

TrainConfig resolve_config(const std::string& name, const ExperimentOptions& opts) {
  TrainConfig c = default_config(name);
  if (opts.config) c = config_from_json(*opts.config, c);
  if (opts.seed) c.seed = *opts.seed;
  if (opts.epochs) c.epochs = *opts.epochs;
  if (opts.steps_per_epoch) c.steps_per_epoch = *opts.steps_per_epoch;
  c.experiment = name;
  c.validate();
  return c;
}

OutputMatrices output_matrices(const TestRun& run) {
  const std::size_t steps = run.outputs.size();
  const std::size_t bits = steps ? run.outputs.front().size() : 0;
  OutputMatrices m{Matrix(bits, steps), Matrix(bits, steps), Matrix(bits, steps), Matrix(bits, steps)};
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t i = 0; i < bits; ++i) {
      const double y = run.outputs[t][i];
      const double th = y >= 0.5 ? 1.0 : 0.0;
      const double tg = run.samples[t].target[i];
      m.raw(i, t) = y;
      m.thresholded(i, t) = th;
      m.target(i, t) = tg;
      m.errors(i, t) = th != tg ? 1.0 : 0.0;
    }
  return m;
}

void emit_iv_heatmaps(const IvTrace& trace, const fs::path& dir) {
  if (trace.empty()) return;
  const std::size_t c = trace.front().read.size();
  Matrix rd(c, trace.size()), wr(c, trace.size());
  for (std::size_t t = 0; t < trace.size(); ++t)
    for (std::size_t k = 0; k < c; ++k) {
      rd(k, t) = trace[t].read[k];
      wr(k, t) = trace[t].write[k];
    }
  emit_heatmap(rd, dir / "iv_read.svg", {.auto_range = true, .title = "read vector", .cell_px = 4});
  emit_heatmap(wr, dir / "iv_write.svg", {.lo = 0.0, .hi = 1.0, .title = "write vector", .cell_px = 4});
}

ExperimentResult run_experiment(const std::string& name, const ExperimentOptions& opts) {
  const TrainConfig cfg = resolve_config(name, opts);
  const fs::path dir = opts.out / name / std::to_string(cfg.seed);
  fs::create_directories(dir);
  write_text(dir / "config.json", config_to_json(cfg).dump(2) + "\n");
  if (name == "impulse_response") {
    auto res = run_impulse(cfg, dir);
    res.dir = dir;
    std::cout << res.summary << '\n';
    return res;
  }

  ProgressFn progress;
  if (opts.verbose)
    progress = [&](std::size_t epoch, const RunRecord& rec) {
      std::cerr << name << " epoch " << epoch + 1 << '/' << cfg.epochs;
      if (rec.train_loss.size() >= 100) std::cerr << " median_loss=" << final_windowed_median(rec.train_loss);
      if (!rec.validation.empty() && rec.validation.back().epoch == epoch)
        std::cerr << " val_acc=" << rec.validation.back().report.metric.hamming_accuracy
                  << " recall_err=" << rec.validation.back().report.metric.recall_error;
      std::cerr << '\n';
    };
  TrainResult tr = train(cfg, progress);

  write_stream(dir / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, tr.record); });
  write_stream(dir / "outputs.csv", [&](std::ostream& os) { write_outputs_csv(os, tr.record.test); });
  write_stream(dir / "iv_trace.csv", [&](std::ostream& os) { write_iv_trace_csv(os, tr.record.test.trace); });
  if (opts.write_snapshot) write_text(dir / "snapshot.json", snapshot(tr.model, cfg));
  if (!tr.record.test.outputs.empty()) {
    const auto m = output_matrices(tr.record.test);
    emit_heatmap(m.raw, dir / "outputs.svg", {.title = "outputs"});
    emit_heatmap(m.thresholded, dir / "thresholded.svg", {.title = "thresholded at 1/2"});
    emit_heatmap(m.target, dir / "targets.svg", {.title = "targets"});
    emit_heatmap(m.errors, dir / "errors.svg", {.palette = Palette::error, .title = "errors"});
    emit_iv_heatmaps(tr.record.test.trace, dir);
  }

  ExperimentResult res{cfg, std::move(tr.record), dir, {}};
  std::ostringstream s;
  s << name << " seed=" << cfg.seed << " steps=" << res.record.train_loss.size();
  if (res.record.train_loss.size() >= 100)
    s << " final_median_loss=" << format_real(final_windowed_median(res.record.train_loss));
  if (!res.record.validation.empty()) {
    const auto& m = res.record.validation.back().report.metric;
    s << " val_accuracy=" << format_real(m.hamming_accuracy) << " val_recall_error=" << format_real(m.recall_error);
  }
  s << " wall=" << res.record.wall_seconds << "s dir=" << dir.string();
  res.summary = s.str();
  std::cout << res.summary << '\n';
  return res;
}

}  // namespace wmbind
