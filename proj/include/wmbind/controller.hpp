#pragma once

// Executive controller: a four-layer feed-forward network.
//
//   in  = concat(x, read)                      (input_dim + iv_dim)
//   h1  = W1^T in                              (controller_dim, linear)
//   h2  = W2^T h1                              (2 * controller_dim, linear)
//   h3  = W3^T h2                              (controller_dim, linear)
//   y   = sigmoid(W4_out^T h3 + b_out)         (output_dim)
//   wr  = sigmoid(W4_write^T h3)               (iv_dim, W4_write fixed)
//
// With IvWiring::layer3 the write vector is sigmoid(h3[0 .. iv_dim)) and
// W4_write is carried but unused. b_out exists only when output_bias is set;
// the hidden layers and the write path never have biases. Only y enters the
// loss; W4_write never receives a gradient.

#include <cstdint>
#include <span>
#include <vector>

#include "wmbind/matrix.hpp"
#include "wmbind/numerics.hpp"

namespace wmbind {

enum class IvWiring { layer4, layer3 };

struct FfnConfig {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::size_t iv_dim = 0;
  std::size_t controller_dim = 0;
  IvWiring iv_wiring = IvWiring::layer4;
  bool output_bias = false;

  /// Throws std::invalid_argument unless
  /// controller_dim >= iv_dim + max(input_dim, output_dim).
  void validate() const;

  std::size_t in_width() const { return input_dim + iv_dim; }
  std::size_t out_width() const { return output_dim + iv_dim; }

  friend bool operator==(const FfnConfig&, const FfnConfig&) = default;
};

struct FfnParams {
  FfnConfig cfg;
  Matrix w1;        // in_width x controller_dim
  Matrix w2;        // controller_dim x 2*controller_dim
  Matrix w3;        // 2*controller_dim x controller_dim
  Matrix w4_out;    // controller_dim x output_dim
  Matrix w4_write;  // controller_dim x iv_dim, fixed
  Matrix b_out;     // 1 x output_dim when cfg.output_bias, else empty
  /// Bumped by every optimizer update; forward caches record it.
  std::uint64_t revision = 0;

  std::uint64_t write_path_fingerprint() const;
};

struct ForwardCache {
  std::vector<double> in;
  std::vector<double> h1;
  std::vector<double> h2;
  std::vector<double> h3;
  std::vector<double> y;
  std::vector<double> write;
  std::uint64_t revision = 0;
};

struct FfnGradients {
  Matrix w1;
  Matrix w2;
  Matrix w3;
  Matrix w4_out;
  Matrix w4_write;  // always zero
  Matrix b_out;
};

struct RmspropState {
  double rho = 0.9;
  double eps = 1e-8;
  Matrix acc1;
  Matrix acc2;
  Matrix acc3;
  Matrix acc4;
  Matrix acc_b;

  friend bool operator==(const RmspropState&, const RmspropState&) = default;
};

/// W4_write ~ U[0,1]; trainable blocks ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)];
/// b_out starts at zero.
FfnParams ffn_init(const FfnConfig& cfg, RngStream& rng);

void ffn_forward_into(const FfnParams& p, std::span<const double> x, std::span<const double> read,
                      ForwardCache& cache);
ForwardCache ffn_forward(const FfnParams& p, std::span<const double> x, std::span<const double> read);

/// Gradients of mse(y, target) for the forward pass recorded in `cache`.
FfnGradients ffn_backward(const FfnParams& p, const ForwardCache& cache, std::span<const double> target);

RmspropState rmsprop_init(const FfnParams& p, double rho = 0.9, double eps = 1e-8);

void rmsprop_step(FfnParams& p, const FfnGradients& g, RmspropState& opt, double lr);

/// Adds weight * d(mse)/d(params) for the recorded forward pass into `grads`
/// (shaped like the parameters; see zero_gradients). Returns the loss.
double ffn_accumulate(const FfnParams& p, const ForwardCache& cache, std::span<const double> target,
                      FfnGradients& grads, double weight);

FfnGradients zero_gradients(const FfnParams& p);

/// Backward pass fused with the RMSprop update, layer by layer and row by row.
/// Bit-identical to ffn_backward followed by rmsprop_step. Returns the loss.
double ffn_train_step(FfnParams& p, RmspropState& opt, const ForwardCache& cache,
                      std::span<const double> target, double lr);

}  // namespace wmbind
