#include "wmbind/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wmbind/kernels.hpp"

namespace wmbind {

namespace {

void fill_uniform(Matrix& m, RngStream& rng, double lo, double hi) {
  for (auto& v : m.data) v = rng.uniform(lo, hi);
}

void init_trainable(Matrix& m, RngStream& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(m.rows));
  fill_uniform(m, rng, -s, s);
}

void check_cache(const FfnParams& p, const ForwardCache& c, std::span<const double> target) {
  const auto& cfg = p.cfg;
  if (c.revision != p.revision)
    throw std::logic_error("ffn_backward: forward cache is stale (parameters changed since forward)");
  if (c.in.size() != cfg.in_width() || c.h1.size() != cfg.controller_dim ||
      c.h2.size() != 2 * cfg.controller_dim || c.h3.size() != cfg.controller_dim ||
      c.y.size() != cfg.output_dim)
    throw std::invalid_argument("ffn_backward: forward cache does not match the network shape");
  if (target.size() != cfg.output_dim)
    throw std::invalid_argument("ffn_backward: target has length " + std::to_string(target.size()) +
                                ", expected " + std::to_string(cfg.output_dim));
}

// dL/dz at the output logits for L = mean((y - t)^2).
std::vector<double> output_delta(std::span<const double> y, std::span<const double> target) {
  const double scale = 2.0 / static_cast<double>(y.size());
  std::vector<double> dz(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) dz[k] = scale * (y[k] - target[k]) * (y[k] * (1.0 - y[k]));
  return dz;
}

void outer(std::span<const double> a, std::span<const double> delta, Matrix& g) {
  const auto& k = kernels::active();
  g = Matrix(a.size(), delta.size());
  for (std::size_t r = 0; r < a.size(); ++r) k.scale(a[r], delta.data(), g.row(r).data(), delta.size());
}

// Returns W delta (taken before the update) and applies the rank-1 RMSprop
// update a ⊗ delta to W.
void fused_layer(Matrix& w, Matrix& acc, std::span<const double> a, std::span<const double> delta,
                 std::vector<double>* dprev, const kernels::RmspropCoeffs& c) {
  const auto& k = kernels::active();
  if (dprev) dprev->resize(w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) {
    double* row = w.row(r).data();
    if (dprev) (*dprev)[r] = k.dot(row, delta.data(), w.cols);
    k.rmsprop_rank1(row, acc.row(r).data(), a[r], delta.data(), w.cols, c);
  }
}

}  // namespace

void FfnConfig::validate() const {
  if (input_dim == 0 || output_dim == 0 || iv_dim == 0)
    throw std::invalid_argument("FfnConfig: input_dim, output_dim and iv_dim must be positive");
  const std::size_t need = iv_dim + std::max(input_dim, output_dim);
  if (controller_dim < need)
    throw std::invalid_argument("FfnConfig: controller_dim=" + std::to_string(controller_dim) +
                                " must be >= iv_dim=" + std::to_string(iv_dim) +
                                " + max(input_dim=" + std::to_string(input_dim) +
                                ", output_dim=" + std::to_string(output_dim) + ") = " +
                                std::to_string(need));
}

std::uint64_t FfnParams::write_path_fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : w4_write.data) {
    const auto* b = reinterpret_cast<const unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof v; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

FfnParams ffn_init(const FfnConfig& cfg, RngStream& rng) {
  cfg.validate();
  const std::size_t c = cfg.controller_dim;
  FfnParams p;
  p.cfg = cfg;
  p.w1 = Matrix(cfg.in_width(), c);
  p.w2 = Matrix(c, 2 * c);
  p.w3 = Matrix(2 * c, c);
  p.w4_out = Matrix(c, cfg.output_dim);
  p.w4_write = Matrix(c, cfg.iv_dim);
  RngStream r1 = rng.fork("w1"), r2 = rng.fork("w2"), r3 = rng.fork("w3");
  RngStream r4 = rng.fork("w4_out"), rw = rng.fork("w4_write");
  init_trainable(p.w1, r1);
  init_trainable(p.w2, r2);
  init_trainable(p.w3, r3);
  init_trainable(p.w4_out, r4);
  fill_uniform(p.w4_write, rw, 0.0, 1.0);
  if (cfg.output_bias) p.b_out = Matrix(1, cfg.output_dim);
  return p;
}

void ffn_forward_into(const FfnParams& p, std::span<const double> x, std::span<const double> read,
                      ForwardCache& cache) {
  const auto& cfg = p.cfg;
  if (x.size() != cfg.input_dim || read.size() != cfg.iv_dim)
    throw std::invalid_argument("ffn_forward: expected x of length " + std::to_string(cfg.input_dim) +
                                " and read of length " + std::to_string(cfg.iv_dim) + ", got " +
                                std::to_string(x.size()) + " and " + std::to_string(read.size()));
  cache.in.resize(cfg.in_width());
  std::copy(x.begin(), x.end(), cache.in.begin());
  std::copy(read.begin(), read.end(), cache.in.begin() + static_cast<std::ptrdiff_t>(cfg.input_dim));
  cache.h1.resize(cfg.controller_dim);
  cache.h2.resize(2 * cfg.controller_dim);
  cache.h3.resize(cfg.controller_dim);
  cache.y.resize(cfg.output_dim);
  cache.write.resize(cfg.iv_dim);

  kernels::vec_mat(cache.in, p.w1, cache.h1);
  kernels::vec_mat(cache.h1, p.w2, cache.h2);
  kernels::vec_mat(cache.h2, p.w3, cache.h3);
  kernels::vec_mat(cache.h3, p.w4_out, cache.y);
  if (cfg.output_bias)
    for (std::size_t k = 0; k < cfg.output_dim; ++k) cache.y[k] += p.b_out.data[k];
  for (auto& v : cache.y) v = sigmoid(v);
  if (cfg.iv_wiring == IvWiring::layer4) {
    kernels::vec_mat(cache.h3, p.w4_write, cache.write);
    for (auto& v : cache.write) v = sigmoid(v);
  } else {
    for (std::size_t i = 0; i < cfg.iv_dim; ++i) cache.write[i] = sigmoid(cache.h3[i]);
  }
  cache.revision = p.revision;
}

ForwardCache ffn_forward(const FfnParams& p, std::span<const double> x, std::span<const double> read) {
  ForwardCache cache;
  ffn_forward_into(p, x, read, cache);
  return cache;
}

FfnGradients ffn_backward(const FfnParams& p, const ForwardCache& cache, std::span<const double> target) {
  check_cache(p, cache, target);
  const auto dz = output_delta(cache.y, target);
  FfnGradients g;
  outer(cache.h3, dz, g.w4_out);
  std::vector<double> dh3(p.w4_out.rows), dh2(p.w3.rows), dh1(p.w2.rows);
  kernels::mat_vec(p.w4_out, dz, dh3);
  outer(cache.h2, dh3, g.w3);
  kernels::mat_vec(p.w3, dh3, dh2);
  outer(cache.h1, dh2, g.w2);
  kernels::mat_vec(p.w2, dh2, dh1);
  outer(cache.in, dh1, g.w1);
  g.w4_write = Matrix(p.w4_write.rows, p.w4_write.cols);
  if (p.cfg.output_bias) {
    g.b_out = Matrix(1, dz.size());
    std::copy(dz.begin(), dz.end(), g.b_out.data.begin());
  }
  return g;
}

FfnGradients zero_gradients(const FfnParams& p) {
  return FfnGradients{Matrix(p.w1.rows, p.w1.cols), Matrix(p.w2.rows, p.w2.cols), Matrix(p.w3.rows, p.w3.cols),
                      Matrix(p.w4_out.rows, p.w4_out.cols), Matrix(p.w4_write.rows, p.w4_write.cols),
                      Matrix(p.b_out.rows, p.b_out.cols)};
}

double ffn_accumulate(const FfnParams& p, const ForwardCache& cache, std::span<const double> target,
                      FfnGradients& g, double weight) {
  check_cache(p, cache, target);
  if (!g.w1.same_shape(p.w1) || !g.w2.same_shape(p.w2) || !g.w3.same_shape(p.w3) || !g.w4_out.same_shape(p.w4_out))
    throw std::invalid_argument("ffn_accumulate: gradient buffers do not match the parameters");
  const auto& k = kernels::active();
  auto add_outer = [&](std::span<const double> a, std::span<const double> delta, Matrix& m) {
    for (std::size_t r = 0; r < a.size(); ++r)
      if (a[r] != 0.0) k.axpy(weight * a[r], delta.data(), m.row(r).data(), delta.size());
  };
  const auto dz = output_delta(cache.y, target);
  std::vector<double> dh3(p.w4_out.rows), dh2(p.w3.rows), dh1(p.w2.rows);
  kernels::mat_vec(p.w4_out, dz, dh3);
  kernels::mat_vec(p.w3, dh3, dh2);
  kernels::mat_vec(p.w2, dh2, dh1);
  add_outer(cache.h3, dz, g.w4_out);
  if (p.cfg.output_bias) add_outer(std::vector<double>{1.0}, dz, g.b_out);
  add_outer(cache.h2, dh3, g.w3);
  add_outer(cache.h1, dh2, g.w2);
  add_outer(cache.in, dh1, g.w1);
  return mse(cache.y, target);
}

RmspropState rmsprop_init(const FfnParams& p, double rho, double eps) {
  RmspropState s;
  s.rho = rho;
  s.eps = eps;
  s.acc1 = Matrix(p.w1.rows, p.w1.cols);
  s.acc2 = Matrix(p.w2.rows, p.w2.cols);
  s.acc3 = Matrix(p.w3.rows, p.w3.cols);
  s.acc4 = Matrix(p.w4_out.rows, p.w4_out.cols);
  s.acc_b = Matrix(p.b_out.rows, p.b_out.cols);
  return s;
}

void rmsprop_step(FfnParams& p, const FfnGradients& g, RmspropState& opt, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("rmsprop_step: learning rate must be positive");
  const kernels::RmspropCoeffs c{lr, opt.rho, 1.0 - opt.rho, opt.eps};
  const auto& k = kernels::active();
  auto apply = [&](Matrix& w, Matrix& acc, const Matrix& grad) {
    if (!w.same_shape(grad) || !w.same_shape(acc))
      throw std::invalid_argument("rmsprop_step: gradient/accumulator shape mismatch");
    k.rmsprop(w.data.data(), acc.data.data(), grad.data.data(), w.data.size(), c);
  };
  apply(p.w4_out, opt.acc4, g.w4_out);
  apply(p.b_out, opt.acc_b, g.b_out);
  apply(p.w3, opt.acc3, g.w3);
  apply(p.w2, opt.acc2, g.w2);
  apply(p.w1, opt.acc1, g.w1);
  ++p.revision;
}

double ffn_train_step(FfnParams& p, RmspropState& opt, const ForwardCache& cache,
                      std::span<const double> target, double lr) {
  check_cache(p, cache, target);
  if (!(lr > 0.0)) throw std::invalid_argument("ffn_train_step: learning rate must be positive");
  const double loss = mse(cache.y, target);
  const kernels::RmspropCoeffs c{lr, opt.rho, 1.0 - opt.rho, opt.eps};
  const auto dz = output_delta(cache.y, target);
  std::vector<double> dh3, dh2, dh1;
  fused_layer(p.w4_out, opt.acc4, cache.h3, dz, &dh3, c);
  if (p.cfg.output_bias) {
    const double one = 1.0;
    fused_layer(p.b_out, opt.acc_b, std::span<const double>(&one, 1), dz, nullptr, c);
  }
  fused_layer(p.w3, opt.acc3, cache.h2, dh3, &dh2, c);
  fused_layer(p.w2, opt.acc2, cache.h1, dh2, &dh1, c);
  fused_layer(p.w1, opt.acc1, cache.in, dh1, nullptr, c);
  ++p.revision;
  return loss;
}

}  // namespace wmbind
