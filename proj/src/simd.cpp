#include "fracsphere/simd.hpp"

#include <cstdlib>
#include <cstring>

#if defined(__x86_64__) || defined(__i386__)
#include <cpuid.h>
#endif

namespace fracsphere::simd {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* w, const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

}  // namespace scalar

namespace {

bool cpu_has_avx2_fma() {
#if defined(FRACSPHERE_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
  unsigned a = 0, b = 0, c = 0, d = 0;
  if (!__get_cpuid(1, &a, &b, &c, &d)) return false;
  const bool fma = (c & (1u << 12)) != 0;
  const bool osxsave = (c & (1u << 27)) != 0;
  if (!fma || !osxsave) return false;
  // the OS must save the ymm state
  unsigned xcr0_lo = 0, xcr0_hi = 0;
  __asm__("xgetbv" : "=a"(xcr0_lo), "=d"(xcr0_hi) : "c"(0));
  if ((xcr0_lo & 0x6u) != 0x6u) return false;
  if (!__get_cpuid_count(7, 0, &a, &b, &c, &d)) return false;
  return (b & (1u << 5)) != 0;
#else
  return false;
#endif
}

struct Table {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  double (*dot3)(const double*, const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
};

Table make_table() {
  const char* env = std::getenv("FRACSPHERE_SIMD");
  const bool forced_scalar = env != nullptr && std::strcmp(env, "scalar") == 0;
  if (!forced_scalar && cpu_has_avx2_fma()) {
    return {Isa::avx2, avx2::dot, avx2::dot3, avx2::axpy, avx2::sum};
  }
  return {Isa::scalar, scalar::dot, scalar::dot3, scalar::axpy, scalar::sum};
}

const Table& table() {
  static const Table t = make_table();
  return t;
}

}  // namespace

bool avx2_supported() {
  static const bool ok = cpu_has_avx2_fma();
  return ok;
}

Isa active_isa() { return table().isa; }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }

double dot3(const double* w, const double* a, const double* b, std::size_t n) {
  return table().dot3(w, a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) { table().axpy(alpha, x, y, n); }

double sum(const double* a, std::size_t n) { return table().sum(a, n); }

}  // namespace fracsphere::simd
