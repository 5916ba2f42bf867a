#pragma once

#include <vector>

#include "fracsphere/sphere.hpp"

namespace fracsphere {

// Forward and inverse real harmonic transform between a GridField on an n = 2
// grid and a SpectralField of band limit lmax. Ring-separable: azimuthal sums
// per ring followed by associated-Legendre sums.
class HarmonicTransform {
 public:
  HarmonicTransform(GridRef grid, int lmax);

  int lmax() const { return lmax_; }
  const GridRef& grid() const { return grid_; }

  SpectralField forward(const GridField& f) const;
  GridField inverse(const SpectralField& c) const;

 private:
  GridRef grid_;
  int lmax_;
  // normalized P_k^m(z_j) for each ring j, triangular layout
  std::vector<double> legendre_;
  // cos(m phi_k), sin(m phi_k), one row of length azimuthal per order m
  std::vector<double> cos_table_;
  std::vector<double> sin_table_;
  std::size_t tri_size_;
};

SpectralField sht_forward(const GridField& f, int lmax);
GridField sht_inverse(const SpectralField& c, const GridRef& grid);

// Evaluates basis functions at arbitrary points of S^2. Keeps scratch space,
// so one instance per thread.
class HarmonicEvaluator {
 public:
  explicit HarmonicEvaluator(int lmax);

  int lmax() const { return lmax_; }
  // all Y_k^m(x), k <= lmax, in SpectralField index order
  void basis(const Vec4& x, std::vector<double>& out);
  double value(const SpectralField& c, const Vec4& x);
  // value and tangential gradient (ambient components) of the band-limited field
  double value_gradient(const SpectralField& c, const Vec4& x, Vec4& grad);

 private:
  void fill(const Vec4& x, bool with_derivative);
  int lmax_;
  std::vector<double> q_;   // normalized Legendre without the rho^m factor
  std::vector<double> dq_;  // its z-derivative
  std::vector<double> re_, im_;  // Re, Im of (x + i y)^m
};

std::vector<double> synthesize_at(const SpectralField& c, const std::vector<Vec4>& points);

// Real harmonic Y_k^m sampled on a grid (used by tests and examples).
GridField harmonic_field(const GridRef& grid, int k, int m);

// Laplace-Beltrami of a band-limited field: multiply degree k by -k(k+1).
SpectralField laplacian(const SpectralField& c);

}  // namespace fracsphere
