#include "wmbind/brn.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace wmbind {

namespace {

void check_forget_rate(double f) {
  if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("forget rate must lie in (0, 1]");
}

template <typename T>
void hash_bytes(std::uint64_t& h, const T& value) {
  const auto* p = reinterpret_cast<const unsigned char*>(&value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

std::uint64_t BrnNet::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  hash_bytes(h, n);
  hash_bytes(h, forget_rate);
  for (auto o : offsets) hash_bytes(h, o);
  for (auto s : sources) hash_bytes(h, s);
  for (auto w : weights) hash_bytes(h, w);
  return h;
}

BrnNet build_random(std::size_t n, std::size_t d, RngStream& rng, double forget_rate) {
  if (d == 0 || d >= n)
    throw std::invalid_argument("build_random: need 0 < d < n, got n=" + std::to_string(n) +
                                " d=" + std::to_string(d));
  check_forget_rate(forget_rate);
  BrnNet net;
  net.kind = BrnKind::random;
  net.n = n;
  net.d = d;
  net.forget_rate = forget_rate;
  net.offsets.resize(n + 1);
  net.sources.reserve(n * d);
  net.weights.reserve(n * d);

  std::vector<std::uint32_t> picked;
  picked.reserve(d);
  const std::size_t pool = n - 1;  // every node except j
  for (std::size_t j = 0; j < n; ++j) {
    net.offsets[j] = net.sources.size();
    // Floyd's sampling of d distinct values from [0, pool).
    picked.clear();
    for (std::size_t k = pool - d; k < pool; ++k) {
      const auto t = static_cast<std::uint32_t>(rng.below(k + 1));
      const bool seen = std::find(picked.begin(), picked.end(), t) != picked.end();
      picked.push_back(seen ? static_cast<std::uint32_t>(k) : t);
    }
    for (auto& s : picked)
      if (s >= j) ++s;  // skip self
    std::sort(picked.begin(), picked.end());
    for (auto s : picked) {
      net.sources.push_back(s);
      net.weights.push_back(rng.uniform() < 2.0 / 3.0 ? kExcitatoryWeight : kInhibitoryWeight);
    }
  }
  net.offsets[n] = net.sources.size();
  return net;
}

BrnNet build_lattice(std::size_t n, std::size_t d, double forget_rate) {
  if (d == 0 || 2 * d >= n)
    throw std::invalid_argument("build_lattice: need 0 < d < n/2, got n=" + std::to_string(n) +
                                " d=" + std::to_string(d));
  check_forget_rate(forget_rate);
  BrnNet net;
  net.kind = BrnKind::lattice;
  net.n = n;
  net.d = d;
  net.forget_rate = forget_rate;
  net.offsets.resize(n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    net.offsets[j] = net.sources.size();
    const std::size_t lo = j >= d - 1 ? j - (d - 1) : 0;
    const std::size_t hi = std::min(n - 1, j + (d - 1));
    for (std::size_t i = lo; i <= hi; ++i) {
      if (i == j) continue;
      const std::size_t dist = i > j ? i - j : j - i;
      net.sources.push_back(static_cast<std::uint32_t>(i));
      net.weights.push_back(dist % 3 == 0 ? kInhibitoryWeight : kExcitatoryWeight);
    }
  }
  net.offsets[n] = net.sources.size();
  return net;
}

void brn_step_into(const BrnNet& net, std::span<const double> prev, std::span<const double> input,
                   std::span<double> next) {
  if (prev.size() != net.n || input.size() != net.n || next.size() != net.n)
    throw std::invalid_argument("brn_step: expected vectors of length " + std::to_string(net.n));
  const double f = net.forget_rate;
  for (std::size_t j = 0; j < net.n; ++j) {
    double drive = 0.0;
    for (std::size_t e = net.offsets[j]; e < net.offsets[j + 1]; ++e)
      drive = drive + net.weights[e] * prev[net.sources[e]];
    next[j] = std::max(f * (input[j] + drive), 0.0);
  }
}

BrnState brn_step(const BrnNet& net, const BrnState& state, std::span<const double> input) {
  BrnState out = BrnState::zeros(net.n);
  brn_step_into(net, state.activations, input, out.activations);
  return out;
}

Matrix impulse_trace(const BrnNet& net, ImpulseMode mode, std::span<const double> pattern,
                     std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("impulse_trace: steps must be >= 1");
  if (pattern.size() != net.n) throw std::invalid_argument("impulse_trace: pattern length != n");
  Matrix trace(steps, net.n);
  const std::vector<double> silence(net.n, 0.0);
  std::vector<double> prev(net.n, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const bool inject = mode == ImpulseMode::repetitive || t == 0;
    brn_step_into(net, prev, inject ? pattern : std::span<const double>(silence), trace.row(t));
    std::copy(trace.row(t).begin(), trace.row(t).end(), prev.begin());
  }
  return trace;
}

}  // namespace wmbind
