#include "wmbind/tasks.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace wmbind {

std::size_t TaskSpec::max_lag() const { return lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end()); }

TaskSpec TaskSpec::first_order() { return {"first_order", TaskKind::first_order, 6, {1}, false}; }

TaskSpec TaskSpec::generalized() {
  return {"generalized", TaskKind::generalized, 4, {1, 2, 3, 4, 5, 6, 7}, false};
}

TaskSpec TaskSpec::second_order() { return {"second_order", TaskKind::second_order, 8, {2}, false}; }

TaskSpec TaskSpec::kth_order(std::size_t k, std::size_t width) {
  if (k == 0) throw std::invalid_argument("kth_order: k must be >= 1");
  if (width == 0) throw std::invalid_argument("kth_order: width must be >= 1");
  return {"kth_order:" + std::to_string(k) + ":" + std::to_string(width), TaskKind::kth_order, width, {k},
          false};
}

TaskSpec TaskSpec::cue_based() { return {"cue_based", TaskKind::cue_based, 6, {1, 2}, true}; }

TaskSpec TaskSpec::by_name(const std::string& name) {
  if (name == "first_order") return first_order();
  if (name == "generalized") return generalized();
  if (name == "second_order") return second_order();
  if (name == "third_order") {
    auto s = kth_order(3, 8);
    s.name = name;
    return s;
  }
  if (name == "fourth_order") {
    auto s = kth_order(4, 8);
    s.name = name;
    return s;
  }
  if (name == "cue_based") return cue_based();
  if (name.rfind("kth_order:", 0) == 0) {
    const auto rest = name.substr(10);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        return kth_order(std::stoul(rest.substr(0, colon)), std::stoul(rest.substr(colon + 1)));
      } catch (const std::logic_error&) {
      }
    }
  }
  throw std::invalid_argument("unknown task '" + name +
                              "' (expected first_order, generalized, second_order, third_order, "
                              "fourth_order, cue_based or kth_order:<k>:<width>)");
}

TaskStream::TaskStream(TaskSpec spec, RngStream rng, std::optional<std::size_t> switch_period)
    : spec_(std::move(spec)), rng_(rng), switch_period_(switch_period) {
  if (switch_period_ && (!spec_.cued || *switch_period_ == 0))
    throw std::invalid_argument("switch_period applies to the cue task only and must be >= 1");
  history_.assign(spec_.max_lag(), BitVector(spec_.width, 0));
}

StepSample TaskStream::next() {
  StepSample s;
  if (spec_.cued) s.cue = switch_period_ ? static_cast<int>((t_ / *switch_period_) % 2) : rng_.bit();
  BitVector x(spec_.width);
  for (auto& b : x) b = rng_.bit();

  s.input.reserve(spec_.input_dim());
  if (spec_.cued) s.input.insert(s.input.end(), 2, static_cast<std::uint8_t>(s.cue));
  s.input.insert(s.input.end(), x.begin(), x.end());

  s.target = x;
  auto append_lag = [&](std::size_t lag) {
    const auto& past = history_[lag - 1];
    s.target.insert(s.target.end(), past.begin(), past.end());
  };
  if (spec_.cued)
    append_lag(spec_.lags[static_cast<std::size_t>(s.cue)]);
  else
    for (auto lag : spec_.lags) append_lag(lag);

  if (!history_.empty()) {
    history_.pop_back();
    history_.push_front(std::move(x));
  }
  ++t_;
  return s;
}

std::vector<StepSample> TaskStream::take(std::size_t len) {
  std::vector<StepSample> out;
  out.reserve(len);
  for (std::size_t i = 0; i < len; ++i) out.push_back(next());
  return out;
}

std::vector<StepSample> first_order_stream(RngStream rng, std::size_t len) {
  return TaskStream(TaskSpec::first_order(), rng).take(len);
}

std::vector<StepSample> generalized_stream(RngStream rng, std::size_t len) {
  return TaskStream(TaskSpec::generalized(), rng).take(len);
}

std::vector<StepSample> second_order_stream(RngStream rng, std::size_t len) {
  return TaskStream(TaskSpec::second_order(), rng).take(len);
}

std::vector<StepSample> kth_order_stream(std::size_t k, std::size_t width, RngStream rng, std::size_t len) {
  return TaskStream(TaskSpec::kth_order(k, width), rng).take(len);
}

std::vector<StepSample> cue_stream(RngStream rng, std::size_t len, std::optional<std::size_t> switch_period) {
  return TaskStream(TaskSpec::cue_based(), rng, switch_period).take(len);
}

std::string bits_to_string(std::span<const std::uint8_t> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

void write_task_csv(std::ostream& os, std::span<const StepSample> samples) {
  os << "step,cue,input,target\n";
  for (std::size_t t = 0; t < samples.size(); ++t) {
    os << t << ',';
    if (samples[t].cue >= 0) os << (samples[t].cue ? "11" : "00");
    os << ',' << bits_to_string(samples[t].input) << ',' << bits_to_string(samples[t].target) << '\n';
  }
}

}  // namespace wmbind
