#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace fracsphere {

// Points of S^n for n = 2, 3 live in R^{n+1}; unused trailing components stay zero.
using Vec4 = std::array<double, 4>;

inline double dot(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

inline Vec4 operator-(const Vec4& a, const Vec4& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

inline Vec4 operator*(double s, const Vec4& a) {
  return {s * a[0], s * a[1], s * a[2], s * a[3]};
}

inline Vec4& operator+=(Vec4& a, const Vec4& b) {
  for (int i = 0; i < 4; ++i) a[i] += b[i];
  return a;
}

inline Vec4 normalized(const Vec4& a) { return (1.0 / norm(a)) * a; }

inline Vec4 unit_vector(int i) {
  Vec4 e{0.0, 0.0, 0.0, 0.0};
  e[static_cast<std::size_t>(i)] = 1.0;
  return e;
}

// Tangential part of g at the sphere point x.
inline Vec4 tangential(const Vec4& x, const Vec4& g) { return g - dot(x, g) * x; }

inline Vec4 cross3(const Vec4& a, const Vec4& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0], 0.0};
}

}  // namespace fracsphere
