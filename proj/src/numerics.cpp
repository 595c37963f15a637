#include "wmbind/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wmbind {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) word = splitmix64(x);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t RngStream::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("RngStream::below: bound must be positive");
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % bound;
}

std::uint8_t RngStream::bit() { return static_cast<std::uint8_t>(next_u64() >> 63); }

RngStream RngStream::fork(std::string_view label) const {
  std::uint64_t x = seed_ ^ rotl(fnv1a(label), 17);
  return RngStream(splitmix64(x));
}

double sigmoid(double x) {
  const double z = std::clamp(x, -500.0, 500.0);
  return 1.0 / (1.0 + std::exp(-z));
}

double mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size())
    throw std::invalid_argument("mse: length mismatch (" + std::to_string(pred.size()) + " vs " +
                                std::to_string(target.size()) + ")");
  if (pred.empty()) throw std::invalid_argument("mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(pred.size());
}

BitVector threshold(std::span<const double> pred, double theta) {
  BitVector bits(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) bits[i] = pred[i] >= theta ? 1 : 0;
  return bits;
}

double hamming_accuracy(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("hamming_accuracy: length mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  if (a.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += (a[i] == b[i]);
  return static_cast<double>(same) / static_cast<double>(a.size());
}

std::vector<double> median_window(std::span<const double> series, std::size_t w) {
  if (w == 0) throw std::invalid_argument("median_window: window must be >= 1");
  if (series.size() < w)
    throw std::invalid_argument("median_window: series of length " + std::to_string(series.size()) +
                                " is shorter than window " + std::to_string(w));
  std::vector<double> out(series.size() - w + 1);
  std::vector<double> buf(w);
  const std::size_t mid = w / 2;
  for (std::size_t t = 0; t < out.size(); ++t) {
    std::copy_n(series.begin() + static_cast<std::ptrdiff_t>(t), w, buf.begin());
    // NaN has no order; a window containing one has no median.
    if (std::any_of(buf.begin(), buf.end(), [](double v) { return std::isnan(v); })) {
      out[t] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid), buf.end());
    double m = buf[mid];
    if (w % 2 == 0) {
      const double lower = *std::max_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid));
      m = 0.5 * (lower + m);
    }
    out[t] = m;
  }
  return out;
}

}  // namespace wmbind
