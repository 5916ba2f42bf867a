#include "fracsphere/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fracsphere/errors.hpp"
#include "fracsphere/simd.hpp"
#include "fracsphere/special.hpp"

namespace fracsphere {

std::shared_ptr<const SphereGrid> SphereGrid::build(int n, const std::vector<int>& counts) {
  if (n != 2 && n != 3) throw DomainError("build_grid: unsupported dimension " + std::to_string(n));
  if (counts.size() != static_cast<std::size_t>(n)) {
    throw DomainError("build_grid: expected " + std::to_string(n) + " resolution counts");
  }
  for (int c : counts) {
    if (c <= 0) throw DomainError("build_grid: resolution counts must be positive");
  }
  const int polar = counts[counts.size() - 2];
  const int azim = counts.back();
  if (polar < 2) throw DomainError("build_grid: polar count must be at least 2");
  if (azim < 4) throw DomainError("build_grid: azimuthal count must be at least 4");

  std::shared_ptr<SphereGrid> g(new SphereGrid());
  g->n_ = n;
  g->counts_ = counts;

  const QuadratureRule gl = gauss_legendre(polar);
  const double dphi = 2.0 * std::numbers::pi / azim;
  g->ring_z_ = gl.nodes;
  g->ring_weight_.resize(polar);
  for (int j = 0; j < polar; ++j) g->ring_weight_[j] = gl.weights[j] * dphi;

  std::vector<double> cphi(azim), sphi(azim);
  for (int k = 0; k < azim; ++k) {
    cphi[k] = std::cos(k * dphi);
    sphi[k] = std::sin(k * dphi);
  }

  double spacing = std::numbers::pi;
  for (int j = 0; j + 1 < polar; ++j) {
    spacing = std::min(spacing, std::acos(gl.nodes[j]) - std::acos(gl.nodes[j + 1]));
  }
  g->polar_spacing_ = spacing;

  if (n == 2) {
    g->nodes_.reserve(static_cast<std::size_t>(polar) * azim);
    g->weights_.reserve(static_cast<std::size_t>(polar) * azim);
    for (int j = 0; j < polar; ++j) {
      const double z = gl.nodes[j];
      const double rho = std::sqrt((1.0 - z) * (1.0 + z));
      for (int k = 0; k < azim; ++k) {
        g->nodes_.push_back({rho * cphi[k], rho * sphi[k], z, 0.0});
        g->weights_.push_back(g->ring_weight_[j]);
      }
    }
  } else {
    const QuadratureRule cu = gauss_chebyshev_u(counts[0]);
    for (int a = 0; a < counts[0]; ++a) {
      const double u = cu.nodes[a];
      const double su = std::sqrt((1.0 - u) * (1.0 + u));
      for (int j = 0; j < polar; ++j) {
        const double z = gl.nodes[j];
        const double rho = std::sqrt((1.0 - z) * (1.0 + z));
        for (int k = 0; k < azim; ++k) {
          g->nodes_.push_back({su * rho * cphi[k], su * rho * sphi[k], su * z, u});
          g->weights_.push_back(cu.weights[a] * g->ring_weight_[j]);
        }
      }
    }
  }
  return g;
}

int SphereGrid::max_band_limit() const {
  // exactness of the products Y_k Y_k' needs lmax <= polar - 1 and 2 lmax < azimuthal
  return std::min(polar() - 1, (azimuthal() - 1) / 2);
}

GridField::GridField(GridRef g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw DomainError("GridField: null grid");
  if (values.size() != grid->size()) throw DomainError("GridField: value count does not match node count");
}

GridField::GridField(GridRef g, double constant) : grid(std::move(g)) {
  if (!grid) throw DomainError("GridField: null grid");
  values.assign(grid->size(), constant);
}

SpectralField::SpectralField(int band_limit) : lmax(band_limit) {
  if (band_limit < 0) throw DomainError("SpectralField: negative band limit");
  coeffs.assign(count(band_limit), 0.0);
}

SpectralField SpectralField::resized(int band_limit) const {
  SpectralField out(band_limit);
  const std::size_t n = std::min(out.coeffs.size(), coeffs.size());
  std::copy(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(n), out.coeffs.begin());
  return out;
}

int SpectralField::effective_degree(double rel_tol) const {
  double peak = 0.0;
  for (double c : coeffs) peak = std::max(peak, std::abs(c));
  if (peak == 0.0) return 0;
  for (int k = lmax; k > 0; --k) {
    for (int m = -k; m <= k; ++m) {
      if (std::abs(at(k, m)) > rel_tol * peak) return k;
    }
  }
  return 0;
}

double quadrature(const GridField& f) {
  return simd::dot(f.grid->weights().data(), f.values.data(), f.values.size());
}

double quadrature(const GridField& f, const GridField& g) {
  if (f.grid != g.grid && f.grid->size() != g.grid->size()) throw DomainError("quadrature: grid mismatch");
  return simd::dot3(f.grid->weights().data(), f.values.data(), g.values.data(), f.values.size());
}

GridField coordinate_field(const GridRef& grid, int i) {
  GridField f(grid);
  for (std::size_t a = 0; a < grid->size(); ++a) f.values[a] = grid->nodes()[a][static_cast<std::size_t>(i)];
  return f;
}

}  // namespace fracsphere
