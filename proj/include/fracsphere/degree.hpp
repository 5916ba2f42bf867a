#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fracsphere/conformal.hpp"
#include "fracsphere/fracop.hpp"
#include "fracsphere/sphere_function.hpp"

namespace fracsphere {

// Quadrature in geodesic polar coordinates about a center c:
// x = cos r c + sin r (direction in c's orthogonal complement). Radial panels are
// Gauss-Legendre on breakpoints that halve toward r = 0 starting from scale/t,
// so the concentration of K o phi_{P,t} near -P is resolved for every t.
struct PolarRuleOptions {
  int radial_nodes = 12;  // per panel
  int directions = 48;    // n = 2: angles; n = 3: polar rings of an S^2 product rule
  double scale = 4.0;     // first breakpoint at scale / t
  int levels = 8;         // number of halvings below the first breakpoint

  PolarRuleOptions doubled() const;
};

struct PolarRule {
  int n = 2;
  std::vector<double> radius, radial_weight;  // radial weights include sin^{n-1} r
  std::vector<Vec4> directions;               // unit vectors orthogonal to e_{n+1}
  std::vector<double> direction_weight;
};

PolarRule polar_rule(int n, double t, const PolarRuleOptions& opt);

// G(P, t) = avg K(phi_{P,t}(x)) x
Vec4 g_map(const SphereFunction& K, const Vec4& P, double t, const PolarRuleOptions& opt = {});
// Same on a product grid (no concentration handling).
Vec4 g_map(const SphereFunction& K, const Vec4& P, double t, const GridRef& grid);

// A(P, t) = (1/n) avg <grad(K o phi_{P,t}), grad x> w^crit, with w = 1 when absent.
Vec4 a_map(const SphereFunction& K, const Vec4& P, double t, const FracOperatorSpec& spec,
           const std::optional<PointEval>& w = std::nullopt, const PolarRuleOptions& opt = {});

struct DegreeOptions {
  int subdivision = 3;  // icosphere level (n = 2) or cube-boundary cells per edge (n = 3)
  PolarRuleOptions rule;
  int error_samples = 24;           // vertices used for the doubling error estimate
  double exclusion_factor = 10.0;   // min |G| must exceed this times the error estimate
  double integer_tolerance = 0.05;  // on the accumulated area
};

struct DegreeResult {
  double s = 0.0;
  double t = 1.0;
  std::string triangulation;
  int vertices = 0;
  int simplices = 0;
  int degree = 0;
  double raw = 0.0;  // accumulated area / |S^n| or signed preimage count
  double min_norm = 0.0;
  double error_estimate = 0.0;
  bool conclusive = false;
  std::string method;
  std::string note;
};

// Degree of p -> G(p/|p|, 1/(1 - s)) on the sphere |p| = s. n = 2 sums signed
// solid angles of image triangles; n = 3 counts signed preimages of a generic
// direction. An inconclusive result carries degree 0 and a note.
DegreeResult brouwer_degree(const SphereFunction& K, double s, const DegreeOptions& opt = {});

// Independent check for n = 2: signed preimage count of a generic direction on the
// same icosphere.
DegreeResult degree_by_preimages(const SphereFunction& K, double s, const DegreeOptions& opt = {});

struct ZeroCount {
  int degree = 0;
  std::vector<Vec4> zeros;
  std::vector<int> signs;
};

// Zeros of p -> G(p) inside the ball |p| < s by Newton from a seed lattice, with
// the sign of the finite-difference Jacobian at each.
ZeroCount degree_by_zero_count(const SphereFunction& K, double s, const PolarRuleOptions& rule = {},
                               int shells = 4, int seed_level = 0);

struct CriticalPointModel {
  Vec4 location{0.0, 0.0, 1.0, 0.0};
  double beta = 1.5;
  std::vector<double> a;      // one per tangent direction
  std::vector<Vec4> frame;    // tangent axes; pole_frame(location) when empty
  int index() const;          // #{a_j < 0}
  double sum() const;
  void validate(int n, const FracOperatorSpec& spec) const;
};

struct IndexCount {
  int sum = 0;                // over models with sum a_j < 0 of (-1)^{i}
  bool criterion = false;     // sum != (-1)^n
  int predicted_degree = 0;   // sum - (-1)^n
  int euler_sum = 0;          // over all models of (-1)^{i}
  bool euler_warning = false; // euler_sum differs from chi(S^n)
};

IndexCount index_count(const std::vector<CriticalPointModel>& models, int n, const FracOperatorSpec& spec);

// K = (1 - chi) K0 + chi (K0(xi) + sum_j a_j |y_j|^beta) in each cap, y_j = x . e_j,
// chi a smooth cutoff of |y| equal to 1 below inner and 0 above outer.
SphereFunctionRef glued_model(SphereFunctionRef background, std::vector<CriticalPointModel> models,
                              double inner = 0.25, double outer = 0.5);

struct ModelConfig {
  std::string name;
  SphereFunctionRef background;
  std::vector<CriticalPointModel> models;
  SphereFunctionRef K;  // glued
};

// 1 + eps x_{n+1}, critical points +-e_{n+1}
ModelConfig tilt_model(int n, double eps, double beta);
// offset + sum_i c_i x_i^2 with distinct c_i, critical points +-e_i
ModelConfig quadratic_model(int n, double offset, const Vec4& c, double beta);

struct OmegaRow {
  Vec4 P{};
  double t = 1.0;
  double numerator = 0.0;    // int (K o phi - K(P))^2
  double denominator = 0.0;  // |int K o phi x|
  double ratio = 0.0;
};

// Rows where the denominator vanishes (relative to int |K o phi|) are dropped.
std::vector<OmegaRow> omega_decay_scan(const SphereFunction& K, const std::vector<Vec4>& P_samples,
                                       const std::vector<double>& t_schedule, const PolarRuleOptions& opt = {});

// Icosphere with outward-oriented triangles (exposed for tests).
struct TriangleMesh {
  std::vector<Vec4> vertices;
  std::vector<std::array<int, 3>> triangles;
};
TriangleMesh icosphere(int level);

// Boundary of the 4-cube, Kuhn-subdivided and projected onto S^3, outward oriented.
struct TetMesh {
  std::vector<Vec4> vertices;
  std::vector<std::array<int, 4>> tets;
};
TetMesh cube_sphere3(int cells);

}  // namespace fracsphere
