#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fracsphere/degree.hpp"
#include "fracsphere/errors.hpp"
#include "fracsphere/harmonics.hpp"

using namespace fracsphere;
constexpr double pi = std::numbers::pi;

namespace {

const FracOperatorSpec half(2, 0.5);

Vec4 random_point(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec4 x{0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i <= n; ++i) x[i] = g(rng);
  return normalized(x);
}

SphereFunctionRef random_K(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  SpectralField c(4);
  for (auto& x : c.coeffs) x = 0.1 * g(rng);
  c.at(0, 0) = 4.0;
  return spectral_function(c);
}

double det3(const Vec4& a, const Vec4& b, const Vec4& c) { return dot(a, cross3(b, c)); }

double det4(const Vec4& a, const Vec4& b, const Vec4& c, const Vec4& d) {
  const Vec4 r[4] = {a, b, c, d};
  double m[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i][j] = r[i][j];
  double det = 1.0;
  for (int k = 0; k < 4; ++k) {
    int p = k;
    for (int i = k + 1; i < 4; ++i)
      if (std::abs(m[i][k]) > std::abs(m[p][k])) p = i;
    if (p != k) {
      std::swap(m[p], m[k]);
      det = -det;
    }
    det *= m[k][k];
    for (int i = k + 1; i < 4; ++i) {
      const double f = m[i][k] / m[k][k];
      for (int j = k; j < 4; ++j) m[i][j] -= f * m[k][j];
    }
  }
  return det;
}

CriticalPointModel model(const Vec4& at, std::vector<double> a, double beta = 1.5) {
  CriticalPointModel m;
  m.location = at;
  m.a = std::move(a);
  m.beta = beta;
  return m;
}

}  // namespace

TEST_SUITE("degree") {
  TEST_CASE("polar rule integrates constants for every dilation") {
    for (int n : {2, 3}) {
      PolarRuleOptions opt;
      if (n == 3) opt.directions = 16;
      for (double t : {1.0, 3.0, 100.0}) {
        const PolarRule r = polar_rule(n, t, opt);
        double sr = 0.0, sd = 0.0;
        for (double w : r.radial_weight) sr += w;
        for (double w : r.direction_weight) sd += w;
        CHECK(sr * sd == doctest::Approx(n == 2 ? 4 * pi : 2 * pi * pi).epsilon(1e-12));
      }
    }
    PolarRuleOptions bad;
    bad.radial_nodes = 0;
    CHECK_THROWS_AS(polar_rule(2, 1.0, bad), DomainError);
  }

  TEST_CASE("G at the identity is the first moment of K") {
    const Vec4 P = normalized(Vec4{0.1, -0.7, 0.3, 0.0});
    const Vec4 G = g_map(*tilt_function(2, 0.1), P, 1.0);
    CHECK(norm(G - Vec4{0.0, 0.0, 0.1 / 3, 0.0}) < 1e-13);
    PolarRuleOptions o3;
    o3.directions = 16;
    const Vec4 G3 = g_map(*tilt_function(3, 0.2), unit_vector(0), 1.0, o3);
    CHECK(norm(G3 - Vec4{0.0, 0.0, 0.0, 0.05}) < 1e-13);
    CHECK(norm(g_map(*constant_function(2, 1.0), P, 7.0)) < 1e-13);
  }

  TEST_CASE("G decays along the tilt axis") {
    const auto K = tilt_function(2, 0.1);
    const Vec4 P = normalized(Vec4{0.3, 0.0, 0.9, 0.0});
    double prev = 1e300;
    for (double t : {1.0, 2.0, 4.0, 8.0, 16.0, 64.0}) {
      const double g = norm(g_map(*K, P, t));
      CHECK(g < prev);
      prev = g;
    }
  }

  TEST_CASE("G follows the gradient of K at P for large t") {
    std::mt19937_64 rng(4);
    for (int s = 0; s < 10; ++s) {
      const auto K = random_K(rng);
      const Vec4 P = random_point(rng, 2);
      for (double t : {16.0, 64.0}) CHECK(dot(g_map(*K, P, t), K->gradient(P)) > 0.0);
      const Vec4 G = g_map(*K, P, 256.0), dK = K->gradient(P);
      CHECK(dot(G, dK) / (norm(G) * norm(dK)) > 0.8);
    }
  }

  TEST_CASE("polar rule agrees with a product grid where both resolve") {
    std::mt19937_64 rng(9);
    const auto grid = SphereGrid::build(2, {64, 128});
    for (int s = 0; s < 5; ++s) {
      const auto K = random_K(rng);
      const Vec4 P = random_point(rng, 2);
      CHECK(norm(g_map(*K, P, 2.0) - g_map(*K, P, 2.0, grid)) < 1e-12);
    }
  }

  TEST_CASE("integration by parts: A equals G for w = 1") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(1.0, 20.0);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
      const auto K = random_K(rng);
      const Vec4 P = random_point(rng, 2);
      const double t = u(rng);
      worst = std::max(worst, norm(a_map(*K, P, t, half) - g_map(*K, P, t)));
    }
    CHECK(worst < 1e-10);
    PolarRuleOptions o3;
    o3.directions = 16;
    const FracOperatorSpec s3(3, 0.5);
    const auto K3 = quadratic_function(3, 1.0, 0.3, {0.1, 0.2, 0.4, 0.8});
    const Vec4 P3 = random_point(rng, 3);
    CHECK(norm(a_map(*K3, P3, 3.0, s3, std::nullopt, o3) - g_map(*K3, P3, 3.0, o3)) < 1e-10);
  }

  TEST_CASE("G is rotation equivariant") {
    std::mt19937_64 rng(13);
    const auto K = random_K(rng);
    const double c = std::cos(1.1), s = std::sin(1.1);
    const std::array<double, 16> R{1, 0, 0, 0, 0, c, -s, 0, 0, s, c, 0, 0, 0, 0, 1};
    const auto KR = rotated_function(K, R);
    for (int i = 0; i < 5; ++i) {
      const Vec4 P = random_point(rng, 2);
      Vec4 RP{0.0, 0.0, 0.0, 0.0};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) RP[a] += R[4 * a + b] * P[b];
      const Vec4 G = g_map(*K, RP, 5.0);
      Vec4 RtG{0.0, 0.0, 0.0, 0.0};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) RtG[a] += R[4 * b + a] * G[b];
      CHECK(norm(g_map(*KR, P, 5.0) - RtG) < 1e-12);
    }
  }

  TEST_CASE("g_map rejects bad arguments") {
    const auto K = tilt_function(2, 0.1);
    CHECK_THROWS_AS(g_map(*K, {0.0, 0.0, 2.0, 0.0}, 2.0), DomainError);
    CHECK_THROWS_AS(g_map(*K, {0.0, 0.0, 1.0, 0.0}, 0.5), DomainError);
    CHECK_THROWS_AS(g_map(*K, {0.0, 0.0, 0.0, 1.0}, 2.0), DomainError);
  }

  TEST_CASE("icosphere meshes") {
    for (int level = 0; level <= 4; ++level) {
      const TriangleMesh m = icosphere(level);
      const int f = 1 << (2 * level);
      CHECK(m.vertices.size() == static_cast<std::size_t>(10 * f + 2));
      CHECK(m.triangles.size() == static_cast<std::size_t>(20 * f));
      double omega = 0.0;
      for (const auto& tri : m.triangles) {
        const Vec4 &a = m.vertices[tri[0]], &b = m.vertices[tri[1]], &c = m.vertices[tri[2]];
        CHECK(det3(a, b, c) > 0.0);
        omega += 2.0 * std::atan2(det3(a, b, c), 1.0 + dot(a, b) + dot(b, c) + dot(c, a));
      }
      CHECK(omega == doctest::Approx(4 * pi).epsilon(1e-12));
    }
    CHECK_THROWS_AS(icosphere(8), DomainError);
  }

  TEST_CASE("cube-boundary meshes of the 3-sphere") {
    for (int cells : {1, 2, 4}) {
      const TetMesh m = cube_sphere3(cells);
      CHECK(m.tets.size() == static_cast<std::size_t>(48 * cells * cells * cells));
      for (const auto& v : m.vertices) CHECK(std::abs(norm(v) - 1.0) < 1e-14);
      for (const auto& t : m.tets)
        CHECK(det4(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]], m.vertices[t[3]]) > 0.0);
    }
    CHECK_THROWS_AS(cube_sphere3(0), DomainError);
  }

  TEST_CASE("tilt K has degree zero, by three methods") {
    const auto K = tilt_function(2, 0.1);
    for (double s : {0.85, 0.9, 0.95}) {
      const DegreeResult a = brouwer_degree(*K, s);
      const DegreeResult b = degree_by_preimages(*K, s);
      CHECK(a.conclusive);
      CHECK(b.conclusive);
      CHECK(a.degree == 0);
      CHECK(b.degree == 0);
      CHECK(a.min_norm > 10.0 * a.error_estimate);
    }
    CHECK(degree_by_zero_count(*K, 0.9).degree == 0);
  }

  TEST_CASE("constant K is inconclusive") {
    const DegreeResult r = brouwer_degree(*constant_function(2, 1.0), 0.9);
    CHECK_FALSE(r.conclusive);
    CHECK(r.degree == 0);
    CHECK_FALSE(r.note.empty());
    CHECK_THROWS_AS(brouwer_degree(*constant_function(2, 1.0), 1.0), DomainError);
  }

  TEST_CASE("smooth quadratic K: area, preimages and zeros agree") {
    for (const auto& [c, expected] : {std::pair{Vec4{0.1, 0.2, 0.4, 0.0}, 1}, std::pair{Vec4{0.1, 0.3, 0.4, 0.0}, -1}}) {
      const auto K = quadratic_function(2, 1.0, 1.0, c);
      const DegreeResult a = brouwer_degree(*K, 0.9);
      const DegreeResult b = degree_by_preimages(*K, 0.9);
      const ZeroCount z = degree_by_zero_count(*K, 0.9);
      CHECK(a.conclusive);
      CHECK(a.degree == expected);
      CHECK(b.degree == expected);
      CHECK(z.degree == expected);
      CHECK(z.zeros.size() == z.signs.size());
    }
  }

  TEST_CASE("index count examples") {
    const Vec4 N{0.0, 0.0, 1.0, 0.0}, S{0.0, 0.0, -1.0, 0.0};
    const IndexCount tilt = index_count({model(N, {-0.05, -0.05}), model(S, {0.05, 0.05})}, 2, half);
    CHECK(tilt.sum == 1);
    CHECK_FALSE(tilt.criterion);
    CHECK(tilt.predicted_degree == 0);
    CHECK_FALSE(tilt.euler_warning);
    const IndexCount two = index_count({model(N, {-0.05, -0.05}), model(S, {-0.1, 0.05})}, 2, half);
    CHECK(two.sum == 0);
    CHECK(two.criterion);
    CHECK(two.predicted_degree == -1);
    CHECK(two.euler_warning);
    const IndexCount three = index_count({model(unit_vector(3), {-1.0, -1.0, -1.0}, 2.5)}, 3, FracOperatorSpec(3, 0.5));
    CHECK(three.sum == -1);
    CHECK(three.predicted_degree == 0);
  }

  TEST_CASE("critical point models are validated") {
    const Vec4 N{0.0, 0.0, 1.0, 0.0};
    CHECK_THROWS_AS(index_count({model(N, {1.0})}, 2, half), DomainError);
    CHECK_THROWS_AS(index_count({model(N, {1.0, 0.0})}, 2, half), DomainError);
    CHECK_THROWS_AS(index_count({model(N, {1.0, -1.0})}, 2, half), DomainError);
    CHECK_THROWS_AS(index_count({model(N, {1.0, 1.0}, 2.0)}, 2, half), DomainError);
    CHECK_THROWS_AS(index_count({model(N, {1.0, 1.0}, 1.0)}, 2, half), DomainError);
    CHECK_THROWS_AS(index_count({model({0.0, 0.0, 2.0, 0.0}, {1.0, 1.0})}, 2, half), DomainError);
    CHECK_THROWS_AS(index_count({model(N, {1.0, 1.0}), model(N, {-1.0, -1.0})}, 2, half), DomainError);
    CriticalPointModel skew = model(N, {1.0, 2.0});
    skew.frame = {unit_vector(0), normalized(Vec4{1.0, 1.0, 0.0, 0.0})};
    CHECK_THROWS_AS(skew.validate(2, half), DomainError);
    CHECK_THROWS_AS(glued_model(constant_function(2, 1.0), {model(N, {1.0, 1.0}), model(normalized(Vec4{0.0, 0.3, 1.0, 0.0}), {1.0, 1.0})}),
                    DomainError);
  }

  TEST_CASE("glued model gradient matches finite differences") {
    const ModelConfig mc = quadratic_model(2, 1.0, {0.1, 0.2, 0.4, 0.0}, 1.5);
    std::mt19937_64 rng(3);
    for (int s = 0; s < 40; ++s) {
      const Vec4 x = random_point(rng, 2);
      const Vec4 v = normalized(tangential(x, random_point(rng, 2)));
      const double h = 1e-6;
      const double fd = (mc.K->value(normalized(x + h * v)) - mc.K->value(normalized(x - h * v))) / (2 * h);
      CHECK(std::abs(fd - dot(mc.K->gradient(x), v)) < 1e-6);
    }
    // the model profile holds exactly inside the inner cap
    const CriticalPointModel& m = mc.models.front();
    const Vec4 y = normalized(m.location + 0.1 * m.frame[0]);
    const Vec4 y0 = m.location;
    const double yy = dot(y, m.frame[0]);
    CHECK(mc.K->value(y) - mc.K->value(y0) == doctest::Approx(m.a[0] * std::pow(std::abs(yy), m.beta)).epsilon(1e-12));
  }

  TEST_CASE("glued models: degree matches the index formula") {
    const std::vector<std::pair<ModelConfig, int>> cases = {
        {tilt_model(2, 0.1, 1.5), 0},
        {quadratic_model(2, 1.0, {0.1, 0.2, 0.4, 0.0}, 1.5), 1},
        {quadratic_model(2, 1.0, {0.1, 0.3, 0.4, 0.0}, 1.5), -1},
    };
    for (const auto& [mc, expected] : cases) {
      const IndexCount ic = index_count(mc.models, 2, half);
      CHECK(ic.predicted_degree == expected);
      CHECK_FALSE(ic.euler_warning);
      const DegreeResult r = brouwer_degree(*mc.K, 0.9);
      CHECK(r.conclusive);
      CHECK(r.degree == expected);
      CHECK(degree_by_preimages(*mc.K, 0.9).degree == expected);
    }
  }

  TEST_CASE("tilt model on the 3-sphere has degree zero") {
    const ModelConfig mc = tilt_model(3, 0.1, 2.5);
    DegreeOptions opt;
    opt.rule.directions = 16;
    opt.subdivision = 6;
    const DegreeResult r = brouwer_degree(*mc.K, 0.9, opt);
    CHECK(r.conclusive);
    CHECK(r.degree == index_count(mc.models, 3, FracOperatorSpec(3, 0.5)).predicted_degree);
    CHECK(r.degree == 0);
  }

  TEST_CASE("omega decay scan") {
    const std::vector<Vec4> P = {normalized(Vec4{0.2, 0.3, 0.9, 0.0}), normalized(Vec4{-0.5, 0.1, 0.4, 0.0})};
    CHECK(omega_decay_scan(*constant_function(2, 1.0), P, {1.0, 4.0}).empty());
    const auto rows = omega_decay_scan(*tilt_function(2, 0.1), P, {2.0, 4.0, 8.0});
    REQUIRE(rows.size() == 6);
    for (const auto& r : rows) {
      CHECK(r.denominator > 0.0);
      CHECK(r.ratio == doctest::Approx(r.numerator / r.denominator));
    }
    // numerator decays faster than the denominator along t
    CHECK(rows[2].ratio < rows[0].ratio);
  }
}
