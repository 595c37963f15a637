#include "wmbind/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace wmbind::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(WMBIND_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Table* pick_default() {
  if (const char* env = std::getenv("WMBIND_KERNELS")) {
    const std::string want(env);
    for (Backend b : available_backends())
      if (name(b) == want) return &table(b);
    throw std::runtime_error("WMBIND_KERNELS=" + want + " is not an available kernel backend");
  }
  return &table(available_backends().back());
}

std::atomic<const Table*> g_active{nullptr};

}  // namespace

std::string_view name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

bool available(Backend b) {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2: return cpu_has_avx2();
    case Backend::neon:
#if defined(WMBIND_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon})
    if (available(b)) out.push_back(b);
  return out;
}

const Table& table(Backend b) {
  if (!available(b)) throw std::invalid_argument("kernel backend not available: " + std::string(name(b)));
  switch (b) {
#if defined(WMBIND_HAVE_AVX2)
    case Backend::avx2: return detail::avx2_table();
#endif
#if defined(WMBIND_HAVE_NEON)
    case Backend::neon: return detail::neon_table();
#endif
    default: return detail::scalar_table();
  }
}

const Table& active() {
  const Table* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = pick_default();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void select(Backend b) { g_active.store(&table(b), std::memory_order_release); }

void vec_mat(std::span<const double> in, const Matrix& m, std::span<double> out) {
  if (in.size() != m.rows || out.size() != m.cols)
    throw std::invalid_argument("vec_mat: dimension mismatch");
  const Table& k = active();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < m.rows; ++r)
    if (in[r] != 0.0) k.axpy(in[r], m.row(r).data(), out.data(), m.cols);
}

void mat_vec(const Matrix& m, std::span<const double> v, std::span<double> out) {
  if (v.size() != m.cols || out.size() != m.rows)
    throw std::invalid_argument("mat_vec: dimension mismatch");
  const Table& k = active();
  for (std::size_t r = 0; r < m.rows; ++r) out[r] = k.dot(m.row(r).data(), v.data(), m.cols);
}

}  // namespace wmbind::kernels
