#include "wmbind/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "wmbind/format.hpp"

namespace wmbind {

void TrainConfig::validate() const {
  if (batch_steps == 0) throw std::invalid_argument("batch_steps must be >= 1");
  if (steps_per_epoch == 0) throw std::invalid_argument("steps_per_epoch must be >= 1");
  if (lr_schedule.empty() || lr_schedule.front().start_epoch != 0)
    throw std::invalid_argument("lr_schedule must start at epoch 0");
  for (std::size_t i = 0; i < lr_schedule.size(); ++i) {
    if (!(lr_schedule[i].lr > 0.0)) throw std::invalid_argument("lr_schedule: learning rates must be positive");
    if (i > 0 && lr_schedule[i].start_epoch <= lr_schedule[i - 1].start_epoch)
      throw std::invalid_argument("lr_schedule must be strictly increasing in start_epoch");
  }
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (validation_every > 0 && validation_steps == 0)
    throw std::invalid_argument("validation_steps must be >= 1 when validation is enabled");
  const TaskSpec t = task_spec();
  if (test_switch_period && !t.cued) throw std::invalid_argument("test_switch_period requires the cue task");
  if (test_switch_period && *test_switch_period == 0) throw std::invalid_argument("test_switch_period must be >= 1");
  if (interface_dim == 0 || interface_dim > brn_nodes)
    throw std::invalid_argument("interface_dim must lie in [1, brn_nodes]");
  if (brn_kind == BrnKind::random && (brn_degree == 0 || brn_degree >= brn_nodes))
    throw std::invalid_argument("random BRN needs 0 < brn_degree < brn_nodes");
  if (brn_kind == BrnKind::lattice && (brn_degree == 0 || 2 * brn_degree >= brn_nodes))
    throw std::invalid_argument("lattice BRN needs 0 < brn_degree < brn_nodes/2");
  if (!(forget_rate > 0.0 && forget_rate <= 1.0)) throw std::invalid_argument("forget_rate must lie in (0, 1]");
  model_spec().ffn.validate();
}

double TrainConfig::lr_for_epoch(std::size_t epoch) const {
  double lr = lr_schedule.front().lr;
  for (const auto& ph : lr_schedule)
    if (ph.start_epoch <= epoch) lr = ph.lr;
  return lr;
}

ModelSpec TrainConfig::model_spec() const {
  const TaskSpec t = task_spec();
  ModelSpec m;
  m.ffn = FfnConfig{t.input_dim(), t.output_dim(), interface_dim, controller_dim, iv_wiring, output_bias};
  m.brn_nodes = brn_nodes;
  m.brn_degree = brn_degree;
  m.forget_rate = forget_rate;
  m.brn_kind = brn_kind;
  m.rho = rho;
  m.eps = eps;
  return m;
}

ValidationReport score_sequence(WmModel& model, const TaskSpec& task, std::span<const StepSample> samples,
                                bool exclude_warmup) {
  if (model.ffn.cfg.input_dim != task.input_dim() || model.ffn.cfg.output_dim != task.output_dim())
    throw std::invalid_argument("validate: model dims (" + std::to_string(model.ffn.cfg.input_dim) + " -> " +
                                std::to_string(model.ffn.cfg.output_dim) + ") do not fit task " + task.name);
  reset(model);
  std::vector<std::vector<double>> outputs;
  outputs.reserve(samples.size());
  double read_sum = 0.0;
  std::size_t read_count = 0;
  for (const auto& s : samples) {
    auto out = wm_step(model, std::span<const std::uint8_t>(s.input));
    for (double r : out.iv.read) read_sum += r;
    read_count += out.iv.read.size();
    outputs.push_back(std::move(out.y));
  }
  ValidationReport rep = score_outputs(task, samples, outputs, exclude_warmup);
  rep.mean_read_activation = read_count ? read_sum / static_cast<double>(read_count) : 0.0;
  return rep;
}

ValidationReport score_outputs(const TaskSpec& task, std::span<const StepSample> samples,
                               std::span<const std::vector<double>> outputs, bool exclude_warmup) {
  if (outputs.size() != samples.size())
    throw std::invalid_argument("score_outputs: " + std::to_string(outputs.size()) + " outputs for " +
                                std::to_string(samples.size()) + " samples");
  const std::size_t w = task.width;
  const std::size_t segments = task.recall_segments();
  const std::size_t warmup = exclude_warmup ? task.max_lag() : 0;

  std::size_t all_hits = 0, all_bits = 0, recall_hits = 0, recall_bits = 0;
  std::vector<std::size_t> seg_hits(segments, 0), seg_bits(segments, 0);
  std::array<std::size_t, 2> cue_hits{}, cue_bits{}, cue_rhits{}, cue_rbits{};
  double mse_sum = 0.0;

  ValidationReport rep;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const auto& s = samples[t];
    if (t < warmup) continue;
    if (outputs[t].size() != s.target.size())
      throw std::invalid_argument("score_outputs: output width does not match the target at step " +
                                  std::to_string(t));
    std::vector<double> target(s.target.begin(), s.target.end());
    mse_sum += mse(outputs[t], target);
    const BitVector bits = threshold(outputs[t], 0.5);
    for (std::size_t i = 0; i < bits.size(); ++i) {
      const bool hit = bits[i] == s.target[i];
      all_hits += hit;
      ++all_bits;
      if (s.cue >= 0) {
        cue_hits[static_cast<std::size_t>(s.cue)] += hit;
        ++cue_bits[static_cast<std::size_t>(s.cue)];
      }
      if (i < w) continue;
      recall_hits += hit;
      ++recall_bits;
      const std::size_t seg = (i - w) / w;
      seg_hits[seg] += hit;
      ++seg_bits[seg];
      if (s.cue >= 0) {
        cue_rhits[static_cast<std::size_t>(s.cue)] += hit;
        ++cue_rbits[static_cast<std::size_t>(s.cue)];
      }
    }
    ++rep.scored_steps;
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto ratio = [nan](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : nan; };
  rep.metric.mse = rep.scored_steps ? mse_sum / static_cast<double>(rep.scored_steps) : nan;
  rep.metric.hamming_accuracy = ratio(all_hits, all_bits);
  rep.metric.recall_error = 1.0 - ratio(recall_hits, recall_bits);
  rep.lag_accuracy.resize(segments);
  for (std::size_t k = 0; k < segments; ++k) rep.lag_accuracy[k] = ratio(seg_hits[k], seg_bits[k]);
  for (std::size_t c = 0; c < 2; ++c) {
    rep.cue_accuracy[c] = ratio(cue_hits[c], cue_bits[c]);
    rep.cue_recall_error[c] = 1.0 - ratio(cue_rhits[c], cue_rbits[c]);
  }
  return rep;
}

ValidationReport validate(WmModel& model, const TaskSpec& task, std::size_t n_steps, RngStream rng,
                          bool exclude_warmup) {
  const auto samples = TaskStream(task, rng).take(n_steps);
  return score_sequence(model, task, samples, exclude_warmup);
}

TestRun test_run(WmModel& model, const TrainConfig& cfg) {
  const TaskSpec task = cfg.task_spec();
  TestRun run;
  const RngStream root(cfg.seed);
  run.samples = TaskStream(task, root.fork("test"), cfg.test_switch_period).take(cfg.test_steps);
  reset(model);
  std::vector<BitVector> inputs;
  inputs.reserve(run.samples.size());
  for (const auto& s : run.samples) inputs.push_back(s.input);
  auto seq = run_sequence(model, inputs);
  run.outputs = std::move(seq.outputs);
  run.trace = std::move(seq.trace);
  return run;
}

TrainResult train(const TrainConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const TaskSpec task = cfg.task_spec();
  const RngStream root(cfg.seed);

  TrainResult res{build_model(cfg.model_spec(), root.fork("model")), RunRecord{}};
  WmModel& model = res.model;
  RunRecord& rec = res.record;
  rec.config = cfg;
  rec.train_loss.reserve(cfg.epochs * cfg.steps_per_epoch);
  rec.lr_applied.reserve(cfg.epochs * cfg.steps_per_epoch);

  const RngStream data_root = root.fork("train");
  std::vector<StepSample> samples;
  if (!cfg.resample_each_epoch) samples = TaskStream(task, data_root).take(cfg.steps_per_epoch);

  std::vector<double> target;
  FfnGradients grads;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr_for_epoch(epoch);
    if (cfg.resample_each_epoch)
      samples = TaskStream(task, data_root.fork("epoch-" + std::to_string(epoch))).take(cfg.steps_per_epoch);
    reset(model);
    std::size_t pending = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      wm_step(model, std::span<const std::uint8_t>(s.input));
      target.assign(s.target.begin(), s.target.end());
      if (cfg.batch_steps == 1) {
        rec.train_loss.push_back(ffn_train_step(model.ffn, model.opt, model.cache, target, lr));
      } else {
        if (pending == 0) grads = zero_gradients(model.ffn);
        rec.train_loss.push_back(
            ffn_accumulate(model.ffn, model.cache, target, grads, 1.0 / static_cast<double>(cfg.batch_steps)));
        if (++pending == cfg.batch_steps || i + 1 == samples.size()) {
          rmsprop_step(model.ffn, grads, model.opt, lr);
          pending = 0;
        }
      }
      rec.lr_applied.push_back(lr);
    }
    if (cfg.validation_every > 0 && (epoch + 1) % cfg.validation_every == 0) {
      ValidationRow row;
      row.epoch = epoch;
      row.step = (epoch + 1) * cfg.steps_per_epoch;
      row.lr = lr;
      row.report = validate(model, task, cfg.validation_steps,
                            root.fork("validate").fork("epoch-" + std::to_string(epoch)), cfg.exclude_warmup);
      rec.validation.push_back(std::move(row));
    }
    if (progress) progress(epoch, rec);
  }
  if (cfg.test_steps > 0) rec.test = test_run(model, cfg);
  reset(model);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return res;
}

double final_windowed_median(std::span<const double> loss, std::size_t w) {
  if (loss.size() < w) throw std::invalid_argument("final_windowed_median: fewer losses than the window");
  return median_window(loss.subspan(loss.size() - w), w).front();
}

double epoch_windowed_median(std::span<const double> loss, std::size_t steps_per_epoch, std::size_t epoch,
                             std::size_t w) {
  const std::size_t end = (epoch + 1) * steps_per_epoch;
  if (end > loss.size() || steps_per_epoch < w)
    throw std::invalid_argument("epoch_windowed_median: epoch out of range or shorter than the window");
  return final_windowed_median(loss.subspan(0, end), w);
}

namespace {

std::string cell(double v) { return std::isnan(v) ? std::string() : format_real(v); }

}  // namespace

void write_metrics_csv(std::ostream& os, const RunRecord& rec) {
  os << "step,epoch,lr,train_mse,val_accuracy,val_recall_error,cue\n";
  const std::size_t spe = rec.config.steps_per_epoch;
  std::size_t next_val = 0;
  for (std::size_t s = 0; s < rec.train_loss.size(); ++s) {
    os << s << ',' << s / spe << ',' << format_real(rec.lr_applied[s]) << ',' << format_real(rec.train_loss[s])
       << ",,,\n";
    while (next_val < rec.validation.size() && rec.validation[next_val].step == s + 1) {
      const auto& v = rec.validation[next_val++];
      const auto& r = v.report;
      os << v.step << ',' << v.epoch << ',' << format_real(v.lr) << ",," << cell(r.metric.hamming_accuracy) << ','
         << cell(r.metric.recall_error) << ",\n";
      for (std::size_t c = 0; c < 2; ++c) {
        if (std::isnan(r.cue_accuracy[c])) continue;
        os << v.step << ',' << v.epoch << ',' << format_real(v.lr) << ",," << cell(r.cue_accuracy[c]) << ','
           << cell(r.cue_recall_error[c]) << ',' << (c ? "11" : "00") << '\n';
      }
    }
  }
}

void write_outputs_csv(std::ostream& os, const TestRun& run) {
  os << "step,cue,index,output,thresholded,target\n";
  for (std::size_t t = 0; t < run.outputs.size(); ++t) {
    const auto& y = run.outputs[t];
    for (std::size_t i = 0; i < y.size(); ++i) {
      os << t << ',';
      if (run.samples[t].cue >= 0) os << (run.samples[t].cue ? "11" : "00");
      os << ',' << i << ',' << format_real(y[i]) << ',' << (y[i] >= 0.5 ? 1 : 0) << ','
         << static_cast<int>(run.samples[t].target[i]) << '\n';
    }
  }
}

}  // namespace wmbind
