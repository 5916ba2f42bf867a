#include "fracsphere/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fracsphere/conformal.hpp"
#include "fracsphere/errors.hpp"
#include "fracsphere/harmonics.hpp"
#include "fracsphere/special.hpp"

namespace fracsphere {

Bubble::Bubble(const Vec4& c, double b, const FracOperatorSpec& s) : center(c), beta(b), spec(s) {
  if (!(beta > 1.0) || !std::isfinite(beta)) throw DomainError("Bubble: beta must be > 1");
  if (std::abs(norm(center) - 1.0) > 1e-12) throw DomainError("Bubble: center must be a unit vector");
}

double Bubble::value(const Vec4& x) const {
  const double c = std::clamp(dot(x, center), -1.0, 1.0);
  const double e = 0.5 * (spec.n - 2.0 * spec.sigma);
  return std::pow(std::sqrt((beta - 1.0) * (beta + 1.0)) / (beta - c), e);
}

double Bubble::beta_from_t(double t) {
  if (!(t > 1.0)) throw DomainError("Bubble::beta_from_t: needs t > 1");
  return (t * t + 1.0) / (t * t - 1.0);
}

double Bubble::t_from_beta(double beta) {
  if (!(beta > 1.0)) throw DomainError("Bubble::t_from_beta: needs beta > 1");
  return std::sqrt((beta + 1.0) / (beta - 1.0));
}

GridField bubble_field(const Bubble& b, const GridRef& grid) {
  GridField f(grid);
  const auto& nodes = grid->nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) f.values[i] = b.value(nodes[i]);
  return f;
}

double equation_residual(const GridField& v, int lmax, const FracOperatorSpec& spec) {
  const SpectralField c = sht_forward(v, lmax);
  GridField rhs = v;
  const double power = spec.sobolev_power();
  for (double& x : rhs.values) x = std::pow(std::abs(x), power - 1.0) * x;
  const SpectralField d = sht_forward(rhs, lmax);
  const double p1 = spec.p1();
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= lmax; ++k) {
    const double lam = spec.lambda(k);
    for (int m = -k; m <= k; ++m) {
      const double lhs = lam * c.at(k, m);
      const double r = lhs - p1 * d.at(k, m);
      num += r * r;
      den += lhs * lhs;
    }
  }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

double bubble_residual(const Bubble& b, int lmax) {
  if (b.spec.n != 2) throw DomainError("bubble_residual: spectral path exists for n = 2 only");
  if (lmax < 1) throw DomainError("bubble_residual: band limit must be positive");
  // coefficients decay like rho^k with rho = beta - sqrt(beta^2 - 1)
  const double rho = b.beta - std::sqrt((b.beta - 1.0) * (b.beta + 1.0));
  const double tail = std::pow(rho, lmax) * (lmax + 1.0);
  if (tail > 1e-10) {
    throw ResolutionError("bubble_residual: band limit " + std::to_string(lmax) + " too small for beta = " +
                          std::to_string(b.beta) + " (estimated tail " + std::to_string(tail) + ")");
  }
  const GridRef grid = SphereGrid::build(2, {2 * lmax, 4 * lmax});
  return equation_residual(bubble_field(b, grid), lmax, b.spec);
}

namespace {

// int_0^pi f(r) dr with Gauss-Legendre panels halving toward both end points
template <class F>
double graded_integral(F&& f, int levels = 52, int nodes = 20) {
  static const QuadratureRule gl = gauss_legendre(20);
  const QuadratureRule& rule = nodes == 20 ? gl : gauss_legendre(nodes);
  auto panel = [&](double a, double b) {
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(m + h * rule.nodes[i]);
    return h * s;
  };
  const double pi = std::numbers::pi;
  double total = 0.0;
  double a = 0.5 * pi;
  for (int k = 0; k < levels; ++k) {
    const double b = 0.5 * a;
    total += panel(b, a) + panel(pi - a, pi - b);
    a = b;
  }
  return total;
}

double beta_function(double a, double b) { return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)); }

}  // namespace

double interaction_integral(double beta, const FracOperatorSpec& spec) {
  if (!(beta > 1.0)) throw DomainError("interaction_integral: beta must be > 1");
  if (beta - 1.0 < 1e-12) throw ResolutionError("interaction_integral: beta too close to 1 for the graded rule");
  const int n = spec.n;
  const double e = 0.5 * (n - 2.0 * spec.sigma);
  const double power = spec.sobolev_power();
  const double root = std::sqrt((beta - 1.0) * (beta + 1.0));
  auto integrand = [&](double r) {
    const double c = std::cos(r);
    const double v1 = std::pow(root / (beta - c), e);
    const double v2 = std::pow(root / (beta + c), e);
    return std::pow(v1, power) * v2 * std::pow(std::sin(r), n - 1);
  };
  return sphere_volume(n - 1) * graded_integral(integrand);
}

double interaction_constant(const FracOperatorSpec& spec) {
  const int n = spec.n;
  return std::pow(2.0, -0.5 * (n - 2.0 * spec.sigma)) * sphere_volume(n - 1) * std::pow(2.0, n - 1) *
         beta_function(0.5 * n, spec.sigma);
}

QuotientResult test_quotient(const SphereFunction& K, double beta, const Vec4& P, const FracOperatorSpec& spec) {
  if (spec.n != 2 || K.dim() != 2) throw DomainError("test_quotient: implemented for n = 2");
  const Bubble b1(P, beta, spec);
  const Bubble b2(-1.0 * P, beta, spec);
  const std::vector<Vec4> frame = pole_frame(P, 2);
  const double q = spec.critical_exponent();
  const int n_alpha = 96;

  QuotientResult r;
  r.max_K = -1e300;
  auto ring = [&](double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    double acc = 0.0;
    for (int a = 0; a < n_alpha; ++a) {
      const double al = 2.0 * std::numbers::pi * a / n_alpha;
      const Vec4 x = c * P + (s * std::cos(al)) * frame[0] + (s * std::sin(al)) * frame[1];
      const double k = K.value(x);
      r.max_K = std::max(r.max_K, k);
      acc += k * std::pow(b1.value(x) + b2.value(x), q);
    }
    return acc * (2.0 * std::numbers::pi / n_alpha) * s;
  };
  r.denominator = graded_integral(ring, 40, 20);
  if (!(r.denominator > 0.0)) throw DomainError("test_quotient: non-positive denominator");
  if (!(r.max_K > 0.0)) throw DomainError("test_quotient: K has no positive values");

  const double omega = spec.volume();
  r.energy = 2.0 * spec.p1() * (omega + interaction_integral(beta, spec));
  const double ex = (spec.n - 2.0 * spec.sigma) / spec.n;
  r.quotient = r.energy / std::pow(r.denominator, ex);
  const double ratio = 2.0 * spec.sigma / spec.n;
  r.bound = spec.p1() * std::pow(omega, ratio) * std::pow(2.0, ratio) / std::pow(r.max_K, ex);
  r.margin = r.bound - r.quotient;
  return r;
}

}  // namespace fracsphere
