#include <arm_neon.h>

#include <cmath>

#include "wmbind/kernels.hpp"

namespace wmbind::kernels::detail {

namespace {

// vmulq + vaddq rather than vfmaq: the scalar reference does not fuse.

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t a0 = vdupq_n_f64(0.0), a1 = a0, a2 = a0, a3 = a0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = vaddq_f64(a0, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    a1 = vaddq_f64(a1, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
    a2 = vaddq_f64(a2, vmulq_f64(vld1q_f64(x + i + 4), vld1q_f64(y + i + 4)));
    a3 = vaddq_f64(a3, vmulq_f64(vld1q_f64(x + i + 6), vld1q_f64(y + i + 6)));
  }
  const float64x2_t u = vaddq_f64(vaddq_f64(a0, a2), vaddq_f64(a1, a3));
  double r = vgetq_lane_f64(u, 0) + vgetq_lane_f64(u, 1);
  for (; i < n; ++i) r = r + x[i] * y[i];
  return r;
}

void scale(double a, const double* x, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

inline void rmsprop_tail(double& w, double& acc, double g, const RmspropCoeffs& c) {
  acc = c.rho * acc + c.one_minus_rho * (g * g);
  w = w - (c.lr * g) / (std::sqrt(acc) + c.eps);
}

inline void rmsprop2(double* w, double* acc, float64x2_t g, const RmspropCoeffs& c) {
  float64x2_t va = vld1q_f64(acc);
  va = vaddq_f64(vmulq_f64(vdupq_n_f64(c.rho), va), vmulq_f64(vdupq_n_f64(c.one_minus_rho), vmulq_f64(g, g)));
  vst1q_f64(acc, va);
  const float64x2_t step =
      vdivq_f64(vmulq_f64(vdupq_n_f64(c.lr), g), vaddq_f64(vsqrtq_f64(va), vdupq_n_f64(c.eps)));
  vst1q_f64(w, vsubq_f64(vld1q_f64(w), step));
}

void rmsprop(double* w, double* acc, const double* g, std::size_t n, const RmspropCoeffs& c) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) rmsprop2(w + i, acc + i, vld1q_f64(g + i), c);
  for (; i < n; ++i) rmsprop_tail(w[i], acc[i], g[i], c);
}

void rmsprop_rank1(double* w, double* acc, double a, const double* delta, std::size_t n,
                   const RmspropCoeffs& c) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) rmsprop2(w + i, acc + i, vmulq_f64(va, vld1q_f64(delta + i)), c);
  for (; i < n; ++i) rmsprop_tail(w[i], acc[i], a * delta[i], c);
}

}  // namespace

const Table& neon_table() {
  static const Table t{Backend::neon, "neon", axpy, dot, scale, rmsprop, rmsprop_rank1};
  return t;
}

}  // namespace wmbind::kernels::detail
