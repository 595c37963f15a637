#include <cmath>

#include "wmbind/kernels.hpp"

namespace wmbind::kernels::detail {

namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t k = 0; k < 8; ++k) s[k] = s[k] + x[i + k] * y[i + k];
  double r = ((s[0] + s[4]) + (s[2] + s[6])) + ((s[1] + s[5]) + (s[3] + s[7]));
  for (; i < n; ++i) r = r + x[i] * y[i];
  return r;
}

void scale(double a, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}

inline void rmsprop_one(double& w, double& acc, double g, const RmspropCoeffs& c) {
  acc = c.rho * acc + c.one_minus_rho * (g * g);
  w = w - (c.lr * g) / (std::sqrt(acc) + c.eps);
}

void rmsprop(double* w, double* acc, const double* g, std::size_t n, const RmspropCoeffs& c) {
  for (std::size_t i = 0; i < n; ++i) rmsprop_one(w[i], acc[i], g[i], c);
}

void rmsprop_rank1(double* w, double* acc, double a, const double* delta, std::size_t n,
                   const RmspropCoeffs& c) {
  for (std::size_t i = 0; i < n; ++i) rmsprop_one(w[i], acc[i], a * delta[i], c);
}

}  // namespace

const Table& scalar_table() {
  static const Table t{Backend::scalar, "scalar", axpy, dot, scale, rmsprop, rmsprop_rank1};
  return t;
}

}  // namespace wmbind::kernels::detail
