#pragma once

// Balanced random network: the learning-free temporary store.
//
// Node update, applied to all nodes at once:
//   P_j(t) = max(F * (I_j(t) + sum_i W_ji * P_i(t-1)), 0)
// The external input I_j is added once per node, outside the recurrent sum.

#include <cstdint>
#include <span>
#include <vector>

#include "wmbind/matrix.hpp"
#include "wmbind/numerics.hpp"

namespace wmbind {

enum class BrnKind { random, lattice };

inline constexpr double kExcitatoryWeight = 0.5;   // k = 2
inline constexpr double kInhibitoryWeight = -1.0;  // k = 1
inline constexpr double kDefaultForgetRate = 1.0 / 3.0;

/// Sparse fixed-weight network. Incoming edges of node j live in
/// [offsets[j], offsets[j+1]) of sources/weights, sorted by source index.
struct BrnNet {
  BrnKind kind = BrnKind::random;
  std::size_t n = 0;
  std::size_t d = 0;
  double forget_rate = kDefaultForgetRate;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> sources;
  std::vector<double> weights;

  std::size_t edge_count() const { return sources.size(); }
  std::size_t in_degree(std::size_t j) const { return offsets[j + 1] - offsets[j]; }
  std::span<const std::uint32_t> sources_of(std::size_t j) const {
    return {sources.data() + offsets[j], in_degree(j)};
  }
  std::span<const double> weights_of(std::size_t j) const {
    return {weights.data() + offsets[j], in_degree(j)};
  }

  /// FNV-1a digest of the wiring and weights.
  std::uint64_t fingerprint() const;

  friend bool operator==(const BrnNet&, const BrnNet&) = default;
};

struct BrnState {
  std::vector<double> activations;

  static BrnState zeros(std::size_t n) { return BrnState{std::vector<double>(n, 0.0)}; }
  friend bool operator==(const BrnState&, const BrnState&) = default;
};

/// Every node gets d incoming edges from distinct non-self sources drawn
/// uniformly; each weight is +1/2 with probability 2/3, else -1.
BrnNet build_random(std::size_t n, std::size_t d, RngStream& rng,
                    double forget_rate = kDefaultForgetRate);

/// Deterministic banded network: edge i->j iff 0 < |i-j| < d, weight -1 when
/// |i-j| is a multiple of 3, else +1/2. No wrap-around at the ends.
BrnNet build_lattice(std::size_t n, std::size_t d, double forget_rate = kDefaultForgetRate);

/// One synchronous update. `input` has length n.
BrnState brn_step(const BrnNet& net, const BrnState& state, std::span<const double> input);

/// Allocation-free form of brn_step; `next` must not alias `prev`.
void brn_step_into(const BrnNet& net, std::span<const double> prev, std::span<const double> input,
                   std::span<double> next);

enum class ImpulseMode { single_shot, repetitive };

/// Rows are the states after 1, 2, ..., steps updates from the zero state.
/// Single-shot injects `pattern` on the first update only; repetitive injects
/// it on every update.
Matrix impulse_trace(const BrnNet& net, ImpulseMode mode, std::span<const double> pattern,
                     std::size_t steps);

}  // namespace wmbind
