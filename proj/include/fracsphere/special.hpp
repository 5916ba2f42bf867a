#pragma once

#include <vector>

namespace fracsphere {

// Gamma(a) / Gamma(b) for a, b > 0.
double gamma_ratio(double a, double b);

// Eigenvalue of P_sigma on degree-k spherical harmonics of S^n:
// Gamma(k + n/2 + sigma) / Gamma(k + n/2 - sigma).
double eigenvalue(int k, int n, double sigma);

// Dimension of the degree-k harmonic space on S^n.
double multiplicity(int k, int n);

// Surface measure of S^n.
double sphere_volume(int n);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int count);

// Gauss rule for the weight (1 - x)^alpha (1 + x)^beta on [-1, 1].
QuadratureRule gauss_jacobi(int count, double alpha, double beta);

// Gauss-Chebyshev rule of the second kind: weight sqrt(1 - x^2) on [-1, 1].
QuadratureRule gauss_chebyshev_u(int count);

}  // namespace fracsphere
