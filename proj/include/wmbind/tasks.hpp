#pragma once

// Online memory-binding tasks. Each step draws a fresh uniform bit vector X_t;
// the target is X_t followed by one or more lagged inputs. History before the
// start of a stream is the zero vector.

#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmbind/numerics.hpp"

namespace wmbind {

enum class TaskKind { first_order, generalized, second_order, kth_order, cue_based };

struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::first_order;
  std::size_t width = 0;          // bits per X_t
  std::vector<std::size_t> lags;  // recall lags, in target order (cue task: selectable lags)
  bool cued = false;              // input = cue(2) ‖ X_t; cue 00 -> lags[0], 11 -> lags[1]

  std::size_t input_dim() const { return (cued ? 2 : 0) + width; }
  std::size_t output_dim() const { return width * (1 + (cued ? 1 : lags.size())); }
  std::size_t max_lag() const;
  /// Number of recall segments in the target (each `width` bits wide).
  std::size_t recall_segments() const { return cued ? 1 : lags.size(); }

  static TaskSpec first_order();
  static TaskSpec generalized();
  static TaskSpec second_order();
  static TaskSpec kth_order(std::size_t k, std::size_t width);
  static TaskSpec cue_based();
  /// first_order, generalized, second_order, third_order, fourth_order,
  /// cue_based, or kth_order:<k>:<width>.
  static TaskSpec by_name(const std::string& name);
};

struct StepSample {
  BitVector input;
  BitVector target;
  int cue = -1;  // 0 for cue 00, 1 for cue 11, -1 when the task has no cue
};

class TaskStream {
 public:
  /// `switch_period`, for the cue task only, replaces i.i.d. cues with
  /// alternating blocks (00 x p, 11 x p, ...).
  TaskStream(TaskSpec spec, RngStream rng, std::optional<std::size_t> switch_period = std::nullopt);

  const TaskSpec& spec() const { return spec_; }
  StepSample next();
  std::vector<StepSample> take(std::size_t len);

 private:
  TaskSpec spec_;
  RngStream rng_;
  std::optional<std::size_t> switch_period_;
  std::size_t t_ = 0;
  std::deque<BitVector> history_;  // history_[k-1] = X_{t-k}
};

std::vector<StepSample> first_order_stream(RngStream rng, std::size_t len);
std::vector<StepSample> generalized_stream(RngStream rng, std::size_t len);
std::vector<StepSample> second_order_stream(RngStream rng, std::size_t len);
std::vector<StepSample> kth_order_stream(std::size_t k, std::size_t width, RngStream rng, std::size_t len);
std::vector<StepSample> cue_stream(RngStream rng, std::size_t len,
                                   std::optional<std::size_t> switch_period = std::nullopt);

/// CSV with columns step,cue,input,target; bit vectors as 0/1 strings.
void write_task_csv(std::ostream& os, std::span<const StepSample> samples);

std::string bits_to_string(std::span<const std::uint8_t> bits);

}  // namespace wmbind
