#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace wmbind {

/// Fixed-length array of {0,1} values. Task inputs and targets use this.
using BitVector = std::vector<std::uint8_t>;

/// Reproducible 64-bit random stream (xoshiro256** seeded through splitmix64).
///
/// Streams are forked by label rather than by drawing from the parent, so a
/// child depends only on the parent's seed and the label. This lets BRN
/// wiring, controller init, interface selection and every task stream draw
/// from independent named substreams of one root seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  std::uint8_t bit();

  RngStream fork(std::string_view label) const;

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

double sigmoid(double x);

/// Mean of squared componentwise differences.
double mse(std::span<const double> pred, std::span<const double> target);

/// bit i = 1 iff pred[i] >= theta (ties map to 1).
BitVector threshold(std::span<const double> pred, double theta = 0.5);

/// Fraction of positions where a and b agree.
double hamming_accuracy(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Element t is the median of series[t .. t+w-1]. Even windows average the
/// two middle order statistics.
/// Windows containing NaN yield NaN.
std::vector<double> median_window(std::span<const double> series, std::size_t w);

struct Metric {
  double mse = 0.0;
  double hamming_accuracy = 0.0;
  double recall_error = 0.0;
};

}  // namespace wmbind
