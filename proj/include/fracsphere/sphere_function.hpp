#pragma once

#include <functional>
#include <memory>
#include <string>

#include "fracsphere/sphere.hpp"

namespace fracsphere {

// A function on S^n that can be evaluated (with its tangential gradient) at any
// point, not only at grid nodes. Curvature candidates K are passed around in this
// form because the degree maps compose them with conformal transformations.
class SphereFunction {
 public:
  virtual ~SphereFunction() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec4& x) const = 0;
  // tangential gradient expressed in ambient coordinates
  virtual Vec4 gradient(const Vec4& x) const = 0;
  virtual std::string describe() const = 0;
};

using SphereFunctionRef = std::shared_ptr<const SphereFunction>;

GridField sample(const SphereFunction& f, const GridRef& grid);

// Band-limited function on S^2 given by harmonic coefficients; the gradient is
// obtained by differentiating the basis.
SphereFunctionRef spectral_function(const SpectralField& c);

// Polynomial presets; "axis" is the last coordinate x_{n+1} (x_3 on S^2).
SphereFunctionRef constant_function(int n, double c);
SphereFunctionRef tilt_function(int n, double eps);        // 1 + eps x_{n+1}
SphereFunctionRef even_band_function(int n, double eps);   // 1 + eps x_{n+1}^2
// offset + eps * sum_i c_i x_i^2
SphereFunctionRef quadratic_function(int n, double offset, double eps, const Vec4& c);

// Precomposition with an orthogonal map: x -> f(R x). R given row-major 4x4.
SphereFunctionRef rotated_function(SphereFunctionRef f, const std::array<double, 16>& R);

// Generic wrapper around callables.
SphereFunctionRef lambda_function(int n, std::function<double(const Vec4&)> value,
                                  std::function<Vec4(const Vec4&)> gradient, std::string name);

}  // namespace fracsphere
