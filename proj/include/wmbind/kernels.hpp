#pragma once

// Dense inner-loop kernels with a scalar reference and SIMD variants chosen at
// runtime. Every backend follows the same floating-point evaluation order, so
// results are bit-identical whichever one is active:
//   - elementwise kernels use separate multiply and add (no FMA);
//   - dot accumulates into 8 interleaved partial sums, reduces them as
//     ((s0+s4)+(s2+s6)) + ((s1+s5)+(s3+s7)), then adds the tail in order.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "wmbind/matrix.hpp"

namespace wmbind::kernels {

enum class Backend { scalar, avx2, neon };

struct RmspropCoeffs {
  double lr;
  double rho;
  double one_minus_rho;
  double eps;
};

struct Table {
  Backend backend;
  const char* name;
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // out[i] = a * x[i]
  void (*scale)(double a, const double* x, double* out, std::size_t n);
  // acc = rho*acc + (1-rho)*g^2 ; w -= lr*g / (sqrt(acc) + eps)
  void (*rmsprop)(double* w, double* acc, const double* g, std::size_t n, const RmspropCoeffs& c);
  // Same update with g[i] = a * delta[i] (one row of an outer-product gradient).
  void (*rmsprop_rank1)(double* w, double* acc, double a, const double* delta, std::size_t n,
                        const RmspropCoeffs& c);
};

std::string_view name(Backend b);
bool available(Backend b);
std::vector<Backend> available_backends();
const Table& table(Backend b);

/// Active table. First use picks the best available backend, unless the
/// WMBIND_KERNELS environment variable names one (scalar, avx2, neon).
const Table& active();
void select(Backend b);

/// out = M^T in, i.e. out[c] = sum_r in[r] * M(r, c). Rows with in[r] == 0
/// are skipped; this does not change the result.
void vec_mat(std::span<const double> in, const Matrix& m, std::span<double> out);

/// out = M v, i.e. out[r] = dot(M.row(r), v).
void mat_vec(const Matrix& m, std::span<const double> v, std::span<double> out);

namespace detail {
const Table& scalar_table();
#if defined(WMBIND_HAVE_AVX2)
const Table& avx2_table();
#endif
#if defined(WMBIND_HAVE_NEON)
const Table& neon_table();
#endif
}  // namespace detail

}  // namespace wmbind::kernels
