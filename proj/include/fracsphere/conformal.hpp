#pragma once

#include <array>
#include <functional>
#include <vector>

#include "fracsphere/fracop.hpp"
#include "fracsphere/sphere.hpp"

namespace fracsphere {

// phi_{P,t}: y -> t y in stereographic coordinates with pole P. The ball point is
// p = ((t - 1)/t) P, the origin being the identity.
struct ConformalParam {
  Vec4 P{0.0, 0.0, 1.0, 0.0};
  double t = 1.0;

  ConformalParam() = default;
  ConformalParam(const Vec4& pole, double dilation);  // validates |P| = 1, t >= 1

  static ConformalParam from_ball(const Vec4& p, int n);
  double s() const { return (t - 1.0) / t; }
  Vec4 ball_point() const { return s() * P; }
  // phi_{P,t}^{-1} = phi_{P,1/t} = phi_{-P,t}
  ConformalParam inverse() const;
};

// Orthonormal frame of the hyperplane orthogonal to P in R^{n+1}.
std::vector<Vec4> pole_frame(const Vec4& P, int n);

// F(y) = (2y/(1+|y|^2), (|y|^2-1)/(|y|^2+1)) with the last axis along P, so y = 0
// lifts to -P. Plane points carry n components in the pole_frame basis.
Vec4 stereo_project(const Vec4& x, const Vec4& P, int n);
Vec4 stereo_lift(const Vec4& y, const Vec4& P, int n);
// |J_F|(y) = (2/(1+|y|^2))^n
double stereo_jacobian(const Vec4& y, int n);

struct MappedPoint {
  Vec4 image;
  double jacobian;  // |det d phi|
};

// Closed form of phi_{P,t}; t > 0 is accepted here (t < 1 gives inverses).
MappedPoint phi_apply(const Vec4& P, double t, const Vec4& x, int n);
MappedPoint phi_apply(const ConformalParam& param, const Vec4& x, int n);

// Ambient differential of the closed form, row-major 4x4.
std::array<double, 16> phi_differential(const Vec4& P, double t, const Vec4& x);
// Tangential gradient of f o phi at x from the tangential gradient g of f at phi(x).
Vec4 pullback_gradient(const Vec4& P, double t, const Vec4& x, const Vec4& g);

// A real function evaluable anywhere on the sphere.
using PointEval = std::function<double(const Vec4&)>;

PointEval point_eval(const SpectralField& c);
// (T_phi v)(x) = v(phi x) |det d phi(x)|^{(n - 2 sigma)/(2n)}
PointEval pushforward_eval(PointEval v, const ConformalParam& param, const FracOperatorSpec& spec);

GridField pushforward_T(const PointEval& v, const ConformalParam& param, const GridRef& grid,
                        const FracOperatorSpec& spec);
GridField pushforward_T(const SpectralField& v, const ConformalParam& param, const GridRef& grid,
                        const FracOperatorSpec& spec);

struct PushforwardResult {
  GridField field;
  int band_limit = 0;         // of the spectral fit used for the composition
  double tail = 0.0;          // relative size of the top-degree coefficients
  bool tail_warning = false;  // input did not look band-limited on its grid
};

// Grid data is fitted by the harmonic transform at the grid's band limit and then
// evaluated at the mapped nodes.
PushforwardResult pushforward_T(const GridField& v, const ConformalParam& param, const FracOperatorSpec& spec);

// avg(x |v|^crit) / avg(|v|^crit); on M this is the plain moment.
Vec4 center_of_mass(const GridField& v, const FracOperatorSpec& spec);

struct VarpiOptions {
  int max_iterations = 60;
  double tolerance = 1e-12;
  double fd_step = 1e-7;
  double max_radius = 0.995;
};

struct NormalizedPair {
  GridField w;
  ConformalParam param;
  int iterations = 0;
  double residual = 0.0;  // |center of mass of w|
};

// Finds p with T_{phi_p} v in M_0 by damped Newton on the center-of-mass residual.
// v is rescaled onto M first.
NormalizedPair decompose_varpi(const PointEval& v, const GridRef& grid, const FracOperatorSpec& spec,
                               const VarpiOptions& opt = {});
NormalizedPair decompose_varpi(const SpectralField& v, const GridRef& grid, const FracOperatorSpec& spec,
                               const VarpiOptions& opt = {});

// varpi(w, p) = T^{-1}_{phi_p} w
PointEval varpi(PointEval w, const ConformalParam& param, const FracOperatorSpec& spec);

struct MuEta {
  double mu = 0.0;
  Vec4 eta{0.0, 0.0, 0.0, 0.0};
  int iterations = 0;
  double residual = 0.0;
  GridField field;  // base + mu + eta . x
};

// Solves avg|base + mu + eta.x|^p = 1 and avg(|base + mu + eta.x|^p x) = 0.
MuEta mu_eta_project(const GridField& base, double p, int max_iterations = 50, double tolerance = 1e-13);
// base = 1 + w~, with w~ restricted to degrees >= 2
MuEta mu_eta_solve(const SpectralField& wtilde, double p, const GridRef& grid);

}  // namespace fracsphere
