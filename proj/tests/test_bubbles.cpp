#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fracsphere/bubbles.hpp"
#include "fracsphere/conformal.hpp"
#include "fracsphere/errors.hpp"
#include "fracsphere/harmonics.hpp"

using namespace fracsphere;
constexpr double pi = std::numbers::pi;

namespace {

const FracOperatorSpec half(2, 0.5);

}  // namespace

TEST_SUITE("bubbles") {
  TEST_CASE("bubble values") {
    const Bubble b({0.0, 0.0, 1.0, 0.0}, 2.0, half);
    CHECK(b.value({0.0, 0.0, 1.0, 0.0}) == doctest::Approx(std::sqrt(std::sqrt(3.0))).epsilon(1e-15));
    CHECK(b.value({0.0, 0.0, -1.0, 0.0}) == doctest::Approx(std::sqrt(std::sqrt(3.0) / 3.0)).epsilon(1e-15));
    CHECK(b.value({1.0, 0.0, 0.0, 0.0}) == doctest::Approx(std::sqrt(std::sqrt(3.0) / 2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(Bubble({0.0, 0.0, 1.0, 0.0}, 1.0, half), DomainError);
    CHECK_THROWS_AS(Bubble({0.0, 0.0, 2.0, 0.0}, 2.0, half), DomainError);
  }

  TEST_CASE("beta and t are inverse maps") {
    CHECK(Bubble::beta_from_t(2.0) == doctest::Approx(5.0 / 3.0));
    CHECK(Bubble::beta_from_t(3.0) == doctest::Approx(1.25));
    for (double t : {1.1, 2.0, 7.5, 40.0}) CHECK(Bubble::t_from_beta(Bubble::beta_from_t(t)) == doctest::Approx(t));
    CHECK_THROWS_AS(Bubble::beta_from_t(1.0), DomainError);
    CHECK_THROWS_AS(Bubble::t_from_beta(0.9), DomainError);
  }

  TEST_CASE("bubbles solve the critical equation") {
    CHECK(bubble_residual(Bubble({0.0, 0.0, 1.0, 0.0}, 2.0, half), 48) < 1e-10);
    CHECK(bubble_residual(Bubble(normalized(Vec4{1.0, 2.0, 2.0, 0.0}), 1.5, half), 64) < 1e-10);
    CHECK_THROWS_AS(bubble_residual(Bubble({0.0, 0.0, 1.0, 0.0}, 1.01, half), 16), ResolutionError);
    // a non-bubble is far from solving it
    const auto g = default_grid(24);
    GridField v = bubble_field(Bubble({0.0, 0.0, 1.0, 0.0}, 2.0, half), g);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= 1.0 + 0.1 * g->nodes()[i][0];
    CHECK(equation_residual(v, 24, half) > 1e-3);
    CHECK(equation_residual(bubble_field(Bubble({0.0, 1.0, 0.0, 0.0}, 3.0, half), g), 24, half) < 1e-10);
  }

  TEST_CASE("bubbles have the critical norm of the constant") {
    const auto g = default_grid(64);
    for (double beta : {1.2, 2.0, 5.0}) {
      const GridField v = bubble_field(Bubble(normalized(Vec4{0.0, 1.0, 1.0, 0.0}), beta, half), g);
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += g->weights()[i] * std::pow(v[i], 4);
      CHECK(s == doctest::Approx(4 * pi).epsilon(1e-9));
    }
  }

  TEST_CASE("bubble parameter from the conformal decomposition") {
    const auto g = default_grid(48);
    const double beta = Bubble::beta_from_t(2.0);
    const NormalizedPair np = decompose_varpi(
        [&](const Vec4& x) { return Bubble({0.0, 0.0, 1.0, 0.0}, beta, half).value(x); }, g, half);
    CHECK(np.param.t == doctest::Approx(2.0).epsilon(1e-8));
  }

  TEST_CASE("interaction constant against an independent quadrature") {
    // A = 2^{-1/2} * 2 pi * int_0^inf 4 r (1 + r^2)^{-3/2} dr
    boost::math::quadrature::exp_sinh<double> es;
    const double radial = es.integrate([](double r) { return 4.0 * r * std::pow(1.0 + r * r, -1.5); });
    const double A = std::pow(2.0, -0.5) * 2 * pi * radial;
    CHECK(interaction_constant(half) == doctest::Approx(A).epsilon(1e-12));
    CHECK(interaction_constant(half) == doctest::Approx(4 * std::sqrt(2.0) * pi).epsilon(1e-12));
  }

  TEST_CASE("interaction integral against a product-grid quadrature") {
    const auto g = SphereGrid::build(2, {200, 400});
    for (double beta : {2.0, 1.3}) {
      const GridField v1 = bubble_field(Bubble({0.0, 0.0, 1.0, 0.0}, beta, half), g);
      const GridField v2 = bubble_field(Bubble({0.0, 0.0, -1.0, 0.0}, beta, half), g);
      double s = 0.0;
      for (std::size_t i = 0; i < v1.size(); ++i) s += g->weights()[i] * std::pow(v1[i], 3) * v2[i];
      CHECK(interaction_integral(beta, half) == doctest::Approx(s).epsilon(1e-9));
    }
  }

  TEST_CASE("interaction integral scales like (beta - 1)^{1/2}") {
    const double A = interaction_constant(half);
    double prev_gap = 1e300, prev_I = 1e300;
    for (double x : {0.1, 0.05, 0.025, 0.0125}) {
      const double I = interaction_integral(1.0 + x, half);
      const double gap = std::abs(I / std::sqrt(x) - A);
      CHECK(gap < prev_gap);
      CHECK(I < prev_I);
      prev_gap = gap;
      prev_I = I;
    }
    CHECK(prev_gap / A < 0.05);
    CHECK_THROWS_AS(interaction_integral(1.0, half), DomainError);
  }

  TEST_CASE("interaction integral grows with beta") {
    double prev = 0.0;
    for (double beta : {1.05, 1.2, 1.5, 2.0, 3.0, 5.0}) {
      const double I = interaction_integral(beta, half);
      CHECK(I > prev);
      prev = I;
    }
  }

  TEST_CASE("two-bubble quotient against constant K") {
    const SphereFunctionRef one = constant_function(2, 1.0);
    const QuotientResult q = test_quotient(*one, 1.05, {0.0, 0.0, 1.0, 0.0}, half);
    CHECK(q.margin > 0.0);
    CHECK(q.bound == doctest::Approx(0.5 * std::sqrt(4 * pi) * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(q.margin == doctest::Approx(q.bound - q.quotient));
    // the margin shrinks as the bubbles concentrate
    const QuotientResult q2 = test_quotient(*one, 2.0, {0.0, 0.0, 1.0, 0.0}, half);
    CHECK(q2.margin > q.margin);
  }

  TEST_CASE("quotient is rotation invariant for constant K and scales with K") {
    const SphereFunctionRef one = constant_function(2, 1.0);
    const double q0 = test_quotient(*one, 1.3, {0.0, 0.0, 1.0, 0.0}, half).quotient;
    const double q1 = test_quotient(*one, 1.3, normalized(Vec4{0.3, -0.4, 0.5, 0.0}), half).quotient;
    CHECK(q1 == doctest::Approx(q0).epsilon(1e-9));
    const double q4 = test_quotient(*constant_function(2, 4.0), 1.3, {0.0, 0.0, 1.0, 0.0}, half).quotient;
    CHECK(q4 == doctest::Approx(0.5 * q0).epsilon(1e-12));
    CHECK_THROWS_AS(test_quotient(*constant_function(2, -1.0), 1.3, {0.0, 0.0, 1.0, 0.0}, half), DomainError);
  }

  TEST_CASE("quotient energy matches the spectral energy of the two-bubble field") {
    const double beta = 2.0;
    const QuotientResult q = test_quotient(*constant_function(2, 1.0), beta, {0.0, 0.0, 1.0, 0.0}, half);
    const auto g = default_grid(64);
    GridField v = bubble_field(Bubble({0.0, 0.0, 1.0, 0.0}, beta, half), g);
    const GridField w = bubble_field(Bubble({0.0, 0.0, -1.0, 0.0}, beta, half), g);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
    CHECK(hsigma_energy(sht_forward(v, 64), half) == doctest::Approx(q.energy).epsilon(1e-9));
    CHECK(norm(center_of_mass(v, half)) < 1e-12);
  }
}
