#pragma once

#include "fracsphere/sphere.hpp"

namespace fracsphere {

struct FracOperatorSpec {
  int n = 2;
  double sigma = 0.5;

  FracOperatorSpec() = default;
  FracOperatorSpec(int dim, double order);  // validates

  // P_sigma(1) = Gamma(n/2 + sigma) / Gamma(n/2 - sigma)
  double p1() const;
  // c_{n,-sigma} of the singular-integral form
  double singular_constant() const;
  // constant in front of |xi - zeta|^{-(n - 2 sigma)} in the Riesz potential
  double riesz_constant() const;
  // 2n / (n - 2 sigma)
  double critical_exponent() const;
  // (n + 2 sigma) / (n - 2 sigma)
  double sobolev_power() const;
  double lambda(int k) const;
  double volume() const;
};

SpectralField apply_ps_spectral(const SpectralField& v, const FracOperatorSpec& spec);

// Near-diagonal treatment of the kernel sums. The kernel is split with a smooth
// cutoff chi(|xi - zeta|): the far part (1 - chi) K is summed over grid nodes
// (O(N^2), vectorized), the near part chi K is integrated in geodesic polar
// coordinates around each target, Gauss-Jacobi in the radius (the weight absorbs
// the r^{1 - 2 sigma} or r^{2 sigma - 1} behaviour) and trapezoid in the angle,
// with the field re-synthesized from its harmonic coefficients. Radii are given
// in units of the polar ring spacing of the grid.
struct KernelSumOptions {
  double inner_radius = 4.0;   // chi = 1 below this chord distance
  double outer_radius = 12.0;  // chi = 0 above this chord distance
  int radial_nodes = 24;       // per radial panel
  double probe_tolerance = 1e-3;
  int probe_targets = 12;
};

GridField apply_ps_singular(const GridField& v, const FracOperatorSpec& spec, const KernelSumOptions& opt = {});
GridField riesz_potential(const GridField& f, const FracOperatorSpec& spec, const KernelSumOptions& opt = {});

// int v P_sigma v = sum lambda_k c_km^2
double hsigma_energy(const SpectralField& v, const FracOperatorSpec& spec);

// E_K(v) = avg(v P v) / avg(K |v|^{crit})^{(n-2 sigma)/n}; v is synthesized on K's grid.
double functional_EK(const SpectralField& v, const GridField& K, const FracOperatorSpec& spec);
double functional_EK(const GridField& v, const GridField& K, const FracOperatorSpec& spec);

// (1 / P(1)) avg(v P v) - avg(|v|^{crit})^{(n - 2 sigma)/n}; the power integral uses grid.
double sobolev_deficit(const SpectralField& v, const FracOperatorSpec& spec, const GridRef& grid);

// Grid whose rule integrates |v|^power exactly enough for band limit lmax fields.
GridRef default_grid(int lmax, double power = 4.0);

}  // namespace fracsphere
