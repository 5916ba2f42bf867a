#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "fracsphere/vec.hpp"

namespace fracsphere {

// Product quadrature grid on S^n.
//   n = 2: counts = {polar, azimuthal}. Gauss-Legendre in z = cos(theta), uniform
//          azimuth phi_k = 2 pi k / azimuthal. Node index = ring * azimuthal + k.
//   n = 3: counts = {psi, polar, azimuthal}. Gauss-Chebyshev (second kind) in cos(psi)
//          times the n = 2 rule on the slices. Quadrature only.
class SphereGrid {
 public:
  static std::shared_ptr<const SphereGrid> build(int n, const std::vector<int>& counts);

  int dim() const { return n_; }
  const std::vector<int>& counts() const { return counts_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Vec4>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  // ring structure (n = 2 only)
  int polar() const { return counts_[counts_.size() - 2]; }
  int azimuthal() const { return counts_.back(); }
  const std::vector<double>& ring_z() const { return ring_z_; }
  // GL weight times 2 pi / azimuthal
  const std::vector<double>& ring_weight() const { return ring_weight_; }
  // largest band limit the n = 2 transform supports on this grid
  int max_band_limit() const;
  // smallest distance between neighbouring polar rings along a meridian
  double polar_spacing() const { return polar_spacing_; }

 private:
  SphereGrid() = default;
  int n_ = 2;
  std::vector<int> counts_;
  std::vector<Vec4> nodes_;
  std::vector<double> weights_;
  std::vector<double> ring_z_;
  std::vector<double> ring_weight_;
  double polar_spacing_ = 0.0;
};

using GridRef = std::shared_ptr<const SphereGrid>;

struct GridField {
  GridRef grid;
  std::vector<double> values;

  GridField() = default;
  GridField(GridRef g, std::vector<double> v);
  explicit GridField(GridRef g, double constant = 0.0);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

// Coefficients in the real orthonormal harmonic basis of S^2.
// Index of (k, m) is k*k + k + m, i.e. degrees ascending and m = -k..k within a degree.
// Y_k^0 = N P_k(z), Y_k^m = sqrt(2) N P_k^m(z) cos(m phi) for m > 0 and
// sqrt(2) N P_k^|m|(z) sin(|m| phi) for m < 0, no Condon-Shortley phase.
// With this convention Y_1^{1}, Y_1^{-1}, Y_1^{0} are sqrt(3/(4 pi)) times x, y, z.
struct SpectralField {
  int lmax = 0;
  std::vector<double> coeffs;

  SpectralField() : coeffs(1, 0.0) {}
  explicit SpectralField(int band_limit);

  static std::size_t index(int k, int m) {
    return static_cast<std::size_t>(k * k + k + m);
  }
  static std::size_t count(int band_limit) {
    return static_cast<std::size_t>((band_limit + 1) * (band_limit + 1));
  }
  double& at(int k, int m) { return coeffs[index(k, m)]; }
  double at(int k, int m) const { return coeffs[index(k, m)]; }
  // copy with band limit changed (truncating or zero padding)
  SpectralField resized(int band_limit) const;
  // highest degree carrying a coefficient above rel_tol * max |coefficient|
  int effective_degree(double rel_tol = 1e-14) const;
};

double quadrature(const GridField& f);
// sum_i w_i f_i g_i
double quadrature(const GridField& f, const GridField& g);

// Coordinate function x_i (0-based) sampled on the grid.
GridField coordinate_field(const GridRef& grid, int i);

}  // namespace fracsphere
