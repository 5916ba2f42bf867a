#pragma once

#include <cstddef>

// Inner-loop kernels shared by the quadrature sums, the harmonic transform and
// the O(N^2) kernel summations. A portable scalar reference and an AVX2/FMA
// variant exist; the variant is picked once per process from CPUID.
// Setting FRACSPHERE_SIMD=scalar in the environment forces the reference path.
namespace fracsphere::simd {

enum class Isa { scalar, avx2 };

Isa active_isa();
const char* isa_name(Isa isa);
bool avx2_supported();

double dot(const double* a, const double* b, std::size_t n);
// sum_i w[i] * a[i] * b[i]
double dot3(const double* w, const double* a, const double* b, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* w, const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
}  // namespace scalar

namespace avx2 {
// Callable only when avx2_supported() is true.
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* w, const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
}  // namespace avx2

}  // namespace fracsphere::simd
