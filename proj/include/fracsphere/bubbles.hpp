#pragma once

#include "fracsphere/fracop.hpp"
#include "fracsphere/sphere.hpp"
#include "fracsphere/sphere_function.hpp"

namespace fracsphere {

// v_beta(x) = (sqrt(beta^2 - 1) / (beta - cos r))^{(n - 2 sigma)/2}, r = d(x, center)
struct Bubble {
  Vec4 center{0.0, 0.0, 1.0, 0.0};
  double beta = 2.0;
  FracOperatorSpec spec;

  Bubble() = default;
  Bubble(const Vec4& c, double b, const FracOperatorSpec& s);  // validates

  double value(const Vec4& x) const;
  // beta of the bubble T^{-1}_{phi_{P,t}} 1 and back
  static double beta_from_t(double t);
  static double t_from_beta(double beta);
};

GridField bubble_field(const Bubble& b, const GridRef& grid);

// Relative L^2 norm of P(v) - P(1) v^{sobolev power}, all in spectral arithmetic
// at band limit lmax (n = 2).
double bubble_residual(const Bubble& b, int lmax);
// Same quantity for arbitrary grid data (transformed at band limit lmax).
double equation_residual(const GridField& v, int lmax, const FracOperatorSpec& spec);

// int v_1^{sobolev power} v_2 for antipodal centers, reduced to a 1-D integral in
// the geodesic radius by rotational symmetry.
double interaction_integral(double beta, const FracOperatorSpec& spec);

// 2^{-(n-2 sigma)/2} omega_{n-1} int_0^inf 2^n r^{n-1} (1 + r^2)^{-(n+2 sigma)/2} dr, closed form
double interaction_constant(const FracOperatorSpec& spec);

struct QuotientResult {
  double quotient = 0.0;
  double bound = 0.0;   // P(1) omega^{2 sigma/n} 2^{2 sigma/n} / (max K)^{(n - 2 sigma)/n}
  double margin = 0.0;  // bound - quotient
  double energy = 0.0;
  double denominator = 0.0;
  double max_K = 0.0;
};

// Two-bubble test quotient with centers P and -P (n = 2). The energy uses the bubble
// equation, int v P v = P(1)(2 omega + 2 I(beta)); the denominator is integrated in
// polar coordinates about P with panels graded toward both centers.
QuotientResult test_quotient(const SphereFunction& K, double beta, const Vec4& P, const FracOperatorSpec& spec);

}  // namespace fracsphere
