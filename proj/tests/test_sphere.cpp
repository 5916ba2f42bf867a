#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/spherical_harmonic.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fracsphere/errors.hpp"
#include "fracsphere/harmonics.hpp"
#include "fracsphere/special.hpp"
#include "fracsphere/sphere.hpp"
#include "fracsphere/sphere_function.hpp"

using namespace fracsphere;
constexpr double pi = std::numbers::pi;

namespace {

double weight_sum(const GridRef& g) {
  double s = 0.0;
  for (double w : g->weights()) s += w;
  return s;
}

SpectralField random_coeffs(int lmax, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  SpectralField c(lmax);
  for (auto& x : c.coeffs) x = n(rng);
  return c;
}

}  // namespace

TEST_SUITE("sphere") {
  TEST_CASE("grid sizes and weight sums") {
    const auto g = SphereGrid::build(2, {32, 64});
    CHECK(g->size() == 2048);
    CHECK(std::abs(weight_sum(g) - 4 * pi) < 1e-12);
    CHECK(std::abs(weight_sum(SphereGrid::build(2, {2, 4})) - 4 * pi) < 1e-12);
    CHECK(std::abs(weight_sum(SphereGrid::build(3, {24, 24, 48})) - 2 * pi * pi) < 1e-10);
  }

  TEST_CASE("grid invariants: unit nodes, positive weights") {
    for (const auto& g : {SphereGrid::build(2, {17, 40}), SphereGrid::build(3, {6, 8, 16})}) {
      for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(std::abs(norm(g->nodes()[i]) - 1.0) < 1e-14);
        CHECK(g->weights()[i] > 0.0);
      }
    }
  }

  TEST_CASE("grid construction rejects bad input") {
    CHECK_THROWS_AS(SphereGrid::build(4, {8, 16, 16, 16}), DomainError);
    CHECK_THROWS_AS(SphereGrid::build(2, {1, 16}), DomainError);
    CHECK_THROWS_AS(SphereGrid::build(2, {8, 3}), DomainError);
    CHECK_THROWS_AS(SphereGrid::build(2, {8}), DomainError);
  }

  TEST_CASE("quadrature of low-degree monomials") {
    const auto g = SphereGrid::build(2, {16, 32});
    CHECK(quadrature(GridField(g, 1.0)) == doctest::Approx(4 * pi).epsilon(1e-14));
    const GridField z = coordinate_field(g, 2);
    CHECK(std::abs(quadrature(z)) < 1e-13);
    CHECK(std::abs(quadrature(z, z) - 4 * pi / 3) < 1e-12);
  }

  TEST_CASE("grid integrates products of harmonics up to its exactness degree") {
    const int polar = 10;
    const auto g = SphereGrid::build(2, {polar, 2 * polar + 2});
    const int L = polar - 1;  // k + k' <= 2 polar - 2
    std::vector<GridField> Y;
    for (int k = 0; k <= L; ++k)
      for (int m = -k; m <= k; ++m) Y.push_back(harmonic_field(g, k, m));
    double worst = 0.0;
    for (std::size_t a = 0; a < Y.size(); ++a)
      for (std::size_t b = 0; b <= a; ++b) worst = std::max(worst, std::abs(quadrature(Y[a], Y[b]) - (a == b ? 1.0 : 0.0)));
    CHECK(worst < 1e-12);
  }

  TEST_CASE("basis matches the Boost spherical harmonics without the Condon-Shortley phase") {
    HarmonicEvaluator ev(8);
    std::vector<double> b;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 20; ++s) {
      const double theta = std::acos(2 * u(rng) - 1), phi = 2 * pi * u(rng);
      ev.basis({std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta), 0.0}, b);
      for (int k = 0; k <= 8; ++k) {
        for (int m = -k; m <= k; ++m) {
          const int am = std::abs(m);
          const double sign = am % 2 ? -1.0 : 1.0;
          double ref;
          if (m == 0) ref = boost::math::spherical_harmonic_r(k, 0, theta, phi);
          else if (m > 0) ref = std::sqrt(2.0) * sign * boost::math::spherical_harmonic_r(k, am, theta, phi);
          else ref = std::sqrt(2.0) * sign * boost::math::spherical_harmonic_i(k, am, theta, phi);
          CHECK(std::abs(b[SpectralField::index(k, m)] - ref) < 1e-12);
        }
      }
    }
  }

  TEST_CASE("transform examples") {
    const auto g = SphereGrid::build(2, {12, 24});
    const SpectralField c = sht_forward(harmonic_field(g, 1, 0), 8);
    for (std::size_t i = 0; i < c.coeffs.size(); ++i)
      CHECK(std::abs(c.coeffs[i] - (i == SpectralField::index(1, 0) ? 1.0 : 0.0)) < 1e-13);
    const SpectralField one = sht_forward(GridField(g, 1.0), 8);
    CHECK(one.at(0, 0) == doctest::Approx(std::sqrt(4 * pi)).epsilon(1e-14));
    // Y_1^1, Y_1^-1, Y_1^0 are sqrt(3/(4 pi)) times x, y, z
    const SpectralField x = sht_forward(coordinate_field(g, 0), 1);
    CHECK(x.at(1, 1) == doctest::Approx(std::sqrt(4 * pi / 3)).epsilon(1e-14));
  }

  TEST_CASE("round trip and Parseval at lmax 16") {
    const auto g = SphereGrid::build(2, {17, 34});
    HarmonicTransform tr(g, 16);
    const SpectralField c = random_coeffs(16, 3);
    const GridField f = tr.inverse(c);
    const SpectralField back = tr.forward(f);
    double err = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
      err = std::max(err, std::abs(back.coeffs[i] - c.coeffs[i]));
      l2 += c.coeffs[i] * c.coeffs[i];
    }
    CHECK(err < 1e-10);
    CHECK(std::abs(quadrature(f, f) - l2) / l2 < 1e-10);
  }

  TEST_CASE("transform refuses band limits beyond the grid") {
    const auto g = SphereGrid::build(2, {8, 16});
    CHECK_THROWS_AS(HarmonicTransform(g, 8), ResolutionError);
    CHECK_NOTHROW(HarmonicTransform(g, 7));
  }

  TEST_CASE("eigenvalues") {
    for (int k = 0; k <= 64; ++k) CHECK(std::abs(eigenvalue(k, 2, 0.5) - (k + 0.5)) < 1e-12);
    CHECK(eigenvalue(1, 2, 0.5) / eigenvalue(0, 2, 0.5) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(multiplicity(1, 2) == 3.0);
    CHECK(multiplicity(3, 2) == 7.0);
    CHECK(multiplicity(2, 3) == doctest::Approx(9.0).epsilon(1e-14));
    CHECK_THROWS_AS(eigenvalue(1, 2, 1.0), DomainError);
    CHECK_THROWS_AS(eigenvalue(1, 2, 0.0), DomainError);
  }

  TEST_CASE("eigenvalues against Boost gamma ratios, monotonicity and growth") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int s = 0; s < 50; ++s) {
      const double sigma = u(rng);
      const int n = 2 + s % 2, k = s * 7 % 90;
      const double ref = boost::math::tgamma_ratio(k + 0.5 * n + sigma, k + 0.5 * n - sigma);
      CHECK(eigenvalue(k, n, sigma) == doctest::Approx(ref).epsilon(1e-12));
    }
    for (double sigma : {0.1, 0.5, 0.9}) {
      for (int k = 0; k < 200; ++k) CHECK(eigenvalue(k + 1, 2, sigma) > eigenvalue(k, 2, sigma));
      const double r32 = eigenvalue(32, 2, sigma) / std::pow(32.0, 2 * sigma);
      const double r64 = eigenvalue(64, 2, sigma) / std::pow(64.0, 2 * sigma);
      CHECK(std::abs(r64 / r32 - 1.0) < 0.05);
    }
    // log-gamma keeps very large degrees finite
    CHECK(std::isfinite(eigenvalue(100000, 3, 0.7)));
  }

  TEST_CASE("sphere volumes") {
    CHECK(sphere_volume(1) == doctest::Approx(2 * pi).epsilon(1e-15));
    CHECK(sphere_volume(2) == doctest::Approx(4 * pi).epsilon(1e-15));
    CHECK(sphere_volume(3) == doctest::Approx(2 * pi * pi).epsilon(1e-15));
  }

  TEST_CASE("Gauss-Jacobi rule integrates its weight against polynomials") {
    const double a = 0.3, b = -0.5;
    const QuadratureRule r = gauss_jacobi(12, a, b);
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      s0 += r.weights[i];
      s1 += r.weights[i] * std::pow(r.nodes[i], 5);
    }
    CHECK(s0 == doctest::Approx(std::pow(2.0, a + b + 1) * boost::math::beta(a + 1, b + 1)).epsilon(1e-13));
    // int x^5 (1-x)^a (1+x)^b via the substitution x = 2u - 1
    double ref = 0.0;
    for (int j = 0; j <= 5; ++j) {
      const double binom = boost::math::binomial_coefficient<double>(5, j);
      ref += binom * std::pow(2.0, j) * (((5 - j) % 2) ? -1.0 : 1.0) * boost::math::beta(j + b + 1, a + 1);
    }
    ref *= std::pow(2.0, a + b + 1);
    CHECK(s1 == doctest::Approx(ref).epsilon(1e-12));
  }

  TEST_CASE("spectral sphere functions evaluate and differentiate consistently") {
    SpectralField c = random_coeffs(6, 21);
    const auto f = spectral_function(c);
    const Vec4 x = normalized(Vec4{0.3, -0.5, 0.7, 0.0});
    const Vec4 g = f->gradient(x);
    CHECK(std::abs(dot(g, x)) < 1e-13);
    const Vec4 tdir = normalized(tangential(x, Vec4{0.1, 0.9, -0.2, 0.0}));
    const double h = 1e-6;
    const double fd = (f->value(normalized(x + h * tdir)) - f->value(normalized(x - (h * tdir)))) / (2 * h);
    CHECK(std::abs(fd - dot(g, tdir)) < 1e-7);
  }
}
