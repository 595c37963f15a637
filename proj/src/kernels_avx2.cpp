#include <immintrin.h>

#include <cmath>

#include "wmbind/kernels.hpp"

namespace wmbind::kernels::detail {

namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  const __m256d t = _mm256_add_pd(acc0, acc1);  // (s0+s4, s1+s5, s2+s6, s3+s7)
  const __m128d u = _mm_add_pd(_mm256_castpd256_pd128(t), _mm256_extractf128_pd(t, 1));
  double r = _mm_cvtsd_f64(u) + _mm_cvtsd_f64(_mm_unpackhi_pd(u, u));
  for (; i < n; ++i) r = r + x[i] * y[i];
  return r;
}

void scale(double a, const double* x, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

inline void rmsprop_tail(double& w, double& acc, double g, const RmspropCoeffs& c) {
  acc = c.rho * acc + c.one_minus_rho * (g * g);
  w = w - (c.lr * g) / (std::sqrt(acc) + c.eps);
}

inline void rmsprop4(double* w, double* acc, __m256d g, __m256d rho, __m256d omr, __m256d lr,
                     __m256d eps) {
  __m256d va = _mm256_loadu_pd(acc);
  va = _mm256_add_pd(_mm256_mul_pd(rho, va), _mm256_mul_pd(omr, _mm256_mul_pd(g, g)));
  _mm256_storeu_pd(acc, va);
  const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, g), _mm256_add_pd(_mm256_sqrt_pd(va), eps));
  _mm256_storeu_pd(w, _mm256_sub_pd(_mm256_loadu_pd(w), step));
}

void rmsprop(double* w, double* acc, const double* g, std::size_t n, const RmspropCoeffs& c) {
  const __m256d rho = _mm256_set1_pd(c.rho), omr = _mm256_set1_pd(c.one_minus_rho);
  const __m256d lr = _mm256_set1_pd(c.lr), eps = _mm256_set1_pd(c.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) rmsprop4(w + i, acc + i, _mm256_loadu_pd(g + i), rho, omr, lr, eps);
  for (; i < n; ++i) rmsprop_tail(w[i], acc[i], g[i], c);
}

void rmsprop_rank1(double* w, double* acc, double a, const double* delta, std::size_t n,
                   const RmspropCoeffs& c) {
  const __m256d rho = _mm256_set1_pd(c.rho), omr = _mm256_set1_pd(c.one_minus_rho);
  const __m256d lr = _mm256_set1_pd(c.lr), eps = _mm256_set1_pd(c.eps);
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    rmsprop4(w + i, acc + i, _mm256_mul_pd(va, _mm256_loadu_pd(delta + i)), rho, omr, lr, eps);
  for (; i < n; ++i) rmsprop_tail(w[i], acc[i], a * delta[i], c);
}

}  // namespace

const Table& avx2_table() {
  static const Table t{Backend::avx2, "avx2", axpy, dot, scale, rmsprop, rmsprop_rank1};
  return t;
}

}  // namespace wmbind::kernels::detail
