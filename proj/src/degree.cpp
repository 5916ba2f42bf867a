#include "fracsphere/degree.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "fracsphere/errors.hpp"
#include "fracsphere/special.hpp"

namespace fracsphere {

PolarRuleOptions PolarRuleOptions::doubled() const {
  PolarRuleOptions o = *this;
  o.radial_nodes *= 2;
  o.directions *= 2;
  o.levels += 2;
  return o;
}

PolarRule polar_rule(int n, double t, const PolarRuleOptions& opt) {
  if (n != 2 && n != 3) throw DomainError("polar_rule: n must be 2 or 3");
  if (opt.radial_nodes < 2 || opt.directions < 4 || opt.levels < 1 || !(opt.scale > 0.0)) {
    throw DomainError("polar_rule: invalid options");
  }
  const double pi = std::numbers::pi;
  std::vector<double> breaks;
  const double top = std::min(pi, opt.scale / t);
  const int outer = static_cast<int>(std::ceil((pi - top) / 0.5));
  for (int k = outer; k >= 0; --k) breaks.push_back(top + (pi - top) * k / std::max(outer, 1));
  double r = top;
  for (int k = 0; k < opt.levels; ++k) {
    r *= 0.5;
    breaks.push_back(r);
  }
  breaks.push_back(0.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  PolarRule rule;
  rule.n = n;
  const QuadratureRule gl = gauss_legendre(opt.radial_nodes);
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double lo = breaks[b], hi = breaks[b + 1];
    const double h = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double rr = m + h * gl.nodes[i];
      rule.radius.push_back(rr);
      rule.radial_weight.push_back(h * gl.weights[i] * std::pow(std::sin(rr), n - 1));
    }
  }
  if (n == 2) {
    for (int k = 0; k < opt.directions; ++k) {
      const double a = 2.0 * pi * k / opt.directions;
      rule.directions.push_back({std::cos(a), std::sin(a), 0.0, 0.0});
      rule.direction_weight.push_back(2.0 * pi / opt.directions);
    }
  } else {
    const int rings = std::max(2, opt.directions / 2);
    const int azim = 2 * rings;
    const QuadratureRule zr = gauss_legendre(rings);
    for (int j = 0; j < rings; ++j) {
      const double z = zr.nodes[j];
      const double rho = std::sqrt((1.0 - z) * (1.0 + z));
      for (int k = 0; k < azim; ++k) {
        const double a = 2.0 * pi * k / azim;
        rule.directions.push_back({rho * std::cos(a), rho * std::sin(a), z, 0.0});
        rule.direction_weight.push_back(zr.weights[j] * 2.0 * pi / azim);
      }
    }
  }
  return rule;
}

namespace {

// Calls f(x, weight) for every node of the polar rule about center c.
template <class F>
void for_each_polar(const PolarRule& rule, const Vec4& c, F&& f) {
  const std::vector<Vec4> frame = pole_frame(c, rule.n);
  std::vector<Vec4> dirs(rule.directions.size());
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    Vec4 v{0.0, 0.0, 0.0, 0.0};
    for (int j = 0; j < rule.n; ++j) v += rule.directions[d][j] * frame[j];
    dirs[d] = v;
  }
  for (std::size_t i = 0; i < rule.radius.size(); ++i) {
    const double cr = std::cos(rule.radius[i]), sr = std::sin(rule.radius[i]);
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      f(cr * c + sr * dirs[d], rule.radial_weight[i] * rule.direction_weight[d]);
    }
  }
}

void check_point(const Vec4& P, double t, int n) {
  if (std::abs(norm(P) - 1.0) > 1e-10) throw DomainError("g_map: P must be a unit vector");
  if (!(t >= 1.0)) throw DomainError("g_map: t must be >= 1");
  for (int i = n + 1; i < 4; ++i)
    if (P[i] != 0.0) throw DomainError("g_map: P has components beyond R^{n+1}");
}

Vec4 g_map_rule(const SphereFunction& K, const Vec4& P, double t, const PolarRule& rule) {
  const int n = K.dim();
  Vec4 acc{0.0, 0.0, 0.0, 0.0};
  for_each_polar(rule, -1.0 * P, [&](const Vec4& x, double w) {
    acc += (w * K.value(phi_apply(P, t, x, n).image)) * x;
  });
  return (1.0 / sphere_volume(n)) * acc;
}

}  // namespace

Vec4 g_map(const SphereFunction& K, const Vec4& P, double t, const PolarRuleOptions& opt) {
  check_point(P, t, K.dim());
  return g_map_rule(K, P, t, polar_rule(K.dim(), t, opt));
}

Vec4 g_map(const SphereFunction& K, const Vec4& P, double t, const GridRef& grid) {
  check_point(P, t, K.dim());
  if (grid->dim() != K.dim()) throw DomainError("g_map: grid dimension mismatch");
  const int n = K.dim();
  Vec4 acc{0.0, 0.0, 0.0, 0.0};
  const auto& nodes = grid->nodes();
  const auto& w = grid->weights();
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += (w[i] * K.value(phi_apply(P, t, nodes[i], n).image)) * nodes[i];
  return (1.0 / sphere_volume(n)) * acc;
}

Vec4 a_map(const SphereFunction& K, const Vec4& P, double t, const FracOperatorSpec& spec,
           const std::optional<PointEval>& w, const PolarRuleOptions& opt) {
  const int n = K.dim();
  check_point(P, t, n);
  if (spec.n != n) throw DomainError("a_map: operator and K dimensions differ");
  const double q = spec.critical_exponent();
  const PolarRule rule = polar_rule(n, t, opt);
  Vec4 acc{0.0, 0.0, 0.0, 0.0};
  for_each_polar(rule, -1.0 * P, [&](const Vec4& x, double wt) {
    const Vec4 y = phi_apply(P, t, x, n).image;
    // <grad f, grad x_i> is the i-th ambient component of the tangential gradient
    Vec4 g = pullback_gradient(P, t, x, K.gradient(y));
    const double weight = w ? std::pow(std::abs((*w)(x)), q) : 1.0;
    acc += (wt * weight) * g;
  });
  return (1.0 / (n * sphere_volume(n))) * acc;
}

TriangleMesh icosphere(int level) {
  if (level < 0 || level > 7) throw DomainError("icosphere: level must lie in [0, 7]");
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  const double base[12][3] = {{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                              {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
  for (const auto& v : base) m.vertices.push_back(normalized(Vec4{v[0], v[1], v[2], 0.0}));
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      m.vertices.push_back(normalized(m.vertices[a] + m.vertices[b]));
      const int id = static_cast<int>(m.vertices.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& tri : m.triangles) {
      const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    m.triangles = std::move(next);
  }
  for (auto& tri : m.triangles) {
    if (dot(m.vertices[tri[0]], cross3(m.vertices[tri[1]], m.vertices[tri[2]])) < 0.0) std::swap(tri[1], tri[2]);
  }
  return m;
}

namespace {

double det4(const Vec4& a, const Vec4& b, const Vec4& c, const Vec4& d) {
  Eigen::Matrix4d M;
  M << a[0], b[0], c[0], d[0], a[1], b[1], c[1], d[1], a[2], b[2], c[2], d[2], a[3], b[3], c[3], d[3];
  return M.determinant();
}

}  // namespace

TetMesh cube_sphere3(int cells) {
  if (cells < 1 || cells > 24) throw DomainError("cube_sphere3: cells must lie in [1, 24]");
  TetMesh mesh;
  std::map<std::array<int, 4>, int> ids;
  auto vertex = [&](const std::array<int, 4>& idx) {
    auto it = ids.find(idx);
    if (it != ids.end()) return it->second;
    Vec4 v;
    for (int i = 0; i < 4; ++i) v[i] = -1.0 + 2.0 * idx[i] / cells;
    mesh.vertices.push_back(normalized(v));
    const int id = static_cast<int>(mesh.vertices.size()) - 1;
    ids.emplace(idx, id);
    return id;
  };
  for (int axis = 0; axis < 4; ++axis) {
    for (int side = 0; side < 2; ++side) {
      int free[3], f = 0;
      for (int i = 0; i < 4; ++i)
        if (i != axis) free[f++] = i;
      for (int a = 0; a < cells; ++a)
        for (int b = 0; b < cells; ++b)
          for (int c = 0; c < cells; ++c) {
            std::array<int, 4> corner{};
            corner[axis] = side * cells;
            corner[free[0]] = a;
            corner[free[1]] = b;
            corner[free[2]] = c;
            int perm[3] = {0, 1, 2};
            do {
              std::array<int, 4> tet;
              std::array<int, 4> cur = corner;
              tet[0] = vertex(cur);
              for (int s = 0; s < 3; ++s) {
                cur[free[perm[s]]] += 1;
                tet[s + 1] = vertex(cur);
              }
              mesh.tets.push_back(tet);
            } while (std::next_permutation(perm, perm + 3));
          }
    }
  }
  for (auto& t : mesh.tets) {
    const auto& v = mesh.vertices;
    if (det4(v[t[0]], v[t[1]], v[t[2]], v[t[3]]) < 0.0) std::swap(t[2], t[3]);
  }
  return mesh;
}

namespace {

struct Samples {
  std::vector<Vec4> P;
  std::vector<Vec4> G;
  double min_norm = HUGE_VAL;
  double error = 0.0;
};

Samples sample_g(const SphereFunction& K, const std::vector<Vec4>& vertices, double t, const DegreeOptions& opt) {
  const int n = K.dim();
  Samples s;
  s.P = vertices;
  const PolarRule rule = polar_rule(n, t, opt.rule);
  s.G.resize(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    s.G[i] = g_map_rule(K, vertices[i], t, rule);
    s.min_norm = std::min(s.min_norm, norm(s.G[i]));
  }
  // doubling estimate on an evenly spaced subset, always including the weakest vertex
  const PolarRule fine = polar_rule(n, t, opt.rule.doubled());
  std::size_t weakest = 0;
  for (std::size_t i = 0; i < s.G.size(); ++i)
    if (norm(s.G[i]) < norm(s.G[weakest])) weakest = i;
  std::vector<std::size_t> idx{weakest};
  const int count = std::max(1, opt.error_samples);
  for (int k = 0; k < count; ++k) idx.push_back(static_cast<std::size_t>(k) * vertices.size() / count);
  for (std::size_t i : idx) s.error = std::max(s.error, norm(g_map_rule(K, vertices[i], t, fine) - s.G[i]));
  return s;
}

Vec4 generic_direction(int n) {
  return n == 2 ? normalized(Vec4{0.31782, -0.54913, 0.77329, 0.0})
                : normalized(Vec4{0.31782, -0.54913, 0.57329, 0.42171});
}

// signed count of simplices whose image cone contains y
double preimage_count(const std::vector<Vec4>& G, const std::vector<std::vector<int>>& simplices, int n) {
  const int dim = n + 1;
  const Vec4 y = generic_direction(n);
  double total = 0.0;
  for (const auto& s : simplices) {
    Eigen::MatrixXd M(dim, dim);
    Eigen::VectorXd rhs(dim);
    for (int j = 0; j < dim; ++j) {
      const Vec4 g = normalized(G[s[j]]);
      for (int i = 0; i < dim; ++i) M(i, j) = g[i];
    }
    for (int i = 0; i < dim; ++i) rhs(i) = y[i];
    const double det = M.determinant();
    if (det == 0.0) continue;
    const Eigen::VectorXd lam = M.partialPivLu().solve(rhs);
    bool inside = true;
    for (int j = 0; j < dim; ++j) inside = inside && lam(j) > 0.0;
    if (inside) total += det > 0.0 ? 1.0 : -1.0;
  }
  return total;
}

double max_image_angle(const std::vector<Vec4>& G, const std::vector<std::vector<int>>& simplices) {
  double worst = 0.0;
  for (const auto& s : simplices)
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b) {
        const double c = std::clamp(dot(normalized(G[s[a]]), normalized(G[s[b]])), -1.0, 1.0);
        worst = std::max(worst, std::acos(c));
      }
  return worst;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

DegreeResult run_degree(const SphereFunction& K, double s, const DegreeOptions& opt, bool area) {
  const int n = K.dim();
  if (!(s > 0.0 && s < 1.0)) throw DomainError("brouwer_degree: radius s must lie in (0, 1)");
  DegreeResult r;
  r.s = s;
  r.t = 1.0 / (1.0 - s);
  std::vector<Vec4> vertices;
  std::vector<std::vector<int>> simplices;
  if (n == 2) {
    const TriangleMesh m = icosphere(opt.subdivision);
    vertices = m.vertices;
    for (const auto& t : m.triangles) simplices.push_back({t[0], t[1], t[2]});
    r.triangulation = "icosphere level " + std::to_string(opt.subdivision);
  } else {
    const TetMesh m = cube_sphere3(opt.subdivision);
    vertices = m.vertices;
    for (const auto& t : m.tets) simplices.push_back({t[0], t[1], t[2], t[3]});
    r.triangulation = "4-cube boundary, " + std::to_string(opt.subdivision) + " cells per edge, Kuhn split";
    area = false;
  }
  r.vertices = static_cast<int>(vertices.size());
  r.simplices = static_cast<int>(simplices.size());
  r.method = area ? "area" : "preimage";

  const Samples smp = sample_g(K, vertices, r.t, opt);
  r.min_norm = smp.min_norm;
  r.error_estimate = smp.error;
  if (!(smp.min_norm > opt.exclusion_factor * smp.error) || smp.min_norm == 0.0) {
    r.conclusive = false;
    r.note = "zero exclusion failed: min |G| = " + fmt(smp.min_norm) + ", error estimate " + fmt(smp.error);
    return r;
  }
  const double angle = max_image_angle(smp.G, simplices);
  if (angle > 2.0 * std::numbers::pi / 3.0) {
    throw ResolutionError("brouwer_degree: image simplices too large (" + fmt(angle) +
                          " rad), triangulation refinement required");
  }
  if (area) {
    double total = 0.0;
    for (const auto& t : simplices) {
      const Vec4 a = normalized(smp.G[t[0]]), b = normalized(smp.G[t[1]]), c = normalized(smp.G[t[2]]);
      total += 2.0 * std::atan2(dot(a, cross3(b, c)), 1.0 + dot(a, b) + dot(b, c) + dot(c, a));
    }
    r.raw = total / (4.0 * std::numbers::pi);
  } else {
    r.raw = preimage_count(smp.G, simplices, n);
  }
  const double rounded = std::round(r.raw);
  if (std::abs(r.raw - rounded) > opt.integer_tolerance) {
    throw ResolutionError("brouwer_degree: accumulated value " + fmt(r.raw) +
                          " is not an integer, triangulation refinement required");
  }
  r.degree = static_cast<int>(rounded);
  r.conclusive = true;
  return r;
}

}  // namespace

DegreeResult brouwer_degree(const SphereFunction& K, double s, const DegreeOptions& opt) {
  return run_degree(K, s, opt, true);
}

DegreeResult degree_by_preimages(const SphereFunction& K, double s, const DegreeOptions& opt) {
  return run_degree(K, s, opt, false);
}

ZeroCount degree_by_zero_count(const SphereFunction& K, double s, const PolarRuleOptions& rule, int shells,
                               int seed_level) {
  if (K.dim() != 2) throw DomainError("degree_by_zero_count: n = 2 only");
  const int n = 2;
  auto F = [&](const Vec4& p) {
    const ConformalParam c = ConformalParam::from_ball(p, n);
    return g_map(K, c.P, c.t, rule);
  };
  std::vector<Vec4> seeds{{0.0, 0.0, 0.0, 0.0}};
  const TriangleMesh dirs = icosphere(seed_level);
  for (int k = 0; k < shells; ++k) {
    const double r = s * (k + 0.5) / shells;
    for (const Vec4& d : dirs.vertices) seeds.push_back(r * d);
  }
  double scale = 0.0;
  for (const Vec4& p : seeds) scale = std::max(scale, norm(F(p)));
  const double tol = 1e-10 * std::max(scale, 1e-300);

  ZeroCount out;
  const double h = 1e-6;
  for (Vec4 p : seeds) {
    Vec4 f = F(p);
    bool found = false;
    for (int it = 0; it < 40; ++it) {
      if (norm(f) < tol) {
        found = true;
        break;
      }
      Eigen::Matrix3d J;
      for (int j = 0; j < 3; ++j) {
        Vec4 pp = p, pm = p;
        pp[j] += h;
        pm[j] -= h;
        const Vec4 d = (1.0 / (2.0 * h)) * (F(pp) - F(pm));
        for (int i = 0; i < 3; ++i) J(i, j) = d[i];
      }
      const Eigen::Vector3d dp = J.fullPivLu().solve(Eigen::Vector3d(-f[0], -f[1], -f[2]));
      double step = 1.0;
      bool moved = false;
      for (int b = 0; b < 20; ++b, step *= 0.5) {
        Vec4 trial = p;
        for (int i = 0; i < 3; ++i) trial[i] += step * dp(i);
        if (norm(trial) >= 0.999) continue;
        const Vec4 ft = F(trial);
        if (norm(ft) < norm(f)) {
          p = trial;
          f = ft;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (!found || norm(p) >= s) continue;
    bool dup = false;
    for (const Vec4& z : out.zeros) dup = dup || norm(z - p) < 1e-5;
    if (dup) continue;
    Eigen::Matrix3d J;
    for (int j = 0; j < 3; ++j) {
      Vec4 pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      const Vec4 d = (1.0 / (2.0 * h)) * (F(pp) - F(pm));
      for (int i = 0; i < 3; ++i) J(i, j) = d[i];
    }
    const int sign = J.determinant() > 0.0 ? 1 : -1;
    out.zeros.push_back(p);
    out.signs.push_back(sign);
    out.degree += sign;
  }
  return out;
}

int CriticalPointModel::index() const {
  return static_cast<int>(std::count_if(a.begin(), a.end(), [](double x) { return x < 0.0; }));
}

double CriticalPointModel::sum() const {
  double s = 0.0;
  for (double x : a) s += x;
  return s;
}

void CriticalPointModel::validate(int n, const FracOperatorSpec& spec) const {
  if (static_cast<int>(a.size()) != n) throw DomainError("critical point model: needs n coefficients a_j");
  for (double x : a)
    if (x == 0.0 || !std::isfinite(x)) throw DomainError("critical point model: coefficients a_j must be nonzero");
  double scale = 0.0;
  for (double x : a) scale += std::abs(x);
  if (std::abs(sum()) <= 1e-12 * scale) throw DomainError("critical point model: sum of a_j must be nonzero");
  if (!(beta > n - 2.0 * spec.sigma && beta < n)) {
    throw DomainError("critical point model: beta must lie in (n - 2 sigma, n)");
  }
  if (std::abs(norm(location) - 1.0) > 1e-10) throw DomainError("critical point model: location must be a unit vector");
  if (!frame.empty()) {
    if (static_cast<int>(frame.size()) != n) throw DomainError("critical point model: frame needs n vectors");
    for (int i = 0; i < n; ++i) {
      if (std::abs(dot(frame[i], location)) > 1e-10) throw DomainError("critical point model: frame not tangent");
      for (int j = 0; j < n; ++j)
        if (std::abs(dot(frame[i], frame[j]) - (i == j ? 1.0 : 0.0)) > 1e-10)
          throw DomainError("critical point model: frame not orthonormal");
    }
  }
}

IndexCount index_count(const std::vector<CriticalPointModel>& models, int n, const FracOperatorSpec& spec) {
  for (std::size_t i = 0; i < models.size(); ++i) {
    models[i].validate(n, spec);
    for (std::size_t j = 0; j < i; ++j)
      if (norm(models[i].location - models[j].location) < 1e-9)
        throw DomainError("index_count: models must have distinct locations");
  }
  IndexCount r;
  const int sign_n = n % 2 == 0 ? 1 : -1;
  for (const auto& m : models) {
    const int term = m.index() % 2 == 0 ? 1 : -1;
    r.euler_sum += term;
    if (m.sum() < 0.0) r.sum += term;
  }
  r.criterion = r.sum != sign_n;
  r.predicted_degree = r.sum - sign_n;
  r.euler_warning = r.euler_sum != 1 + sign_n;
  return r;
}

namespace {

double smooth_step(double u, double* derivative) {
  if (u <= 0.0 || u >= 1.0) {
    if (derivative) *derivative = 0.0;
    return u <= 0.0 ? 0.0 : 1.0;
  }
  const double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
  if (derivative) *derivative = a * b * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u))) / ((a + b) * (a + b));
  return a / (a + b);
}

class GluedModel final : public SphereFunction {
 public:
  GluedModel(SphereFunctionRef bg, std::vector<CriticalPointModel> models, double inner, double outer)
      : bg_(std::move(bg)), models_(std::move(models)), inner_(inner), outer_(outer) {
    for (auto& m : models_) {
      if (m.frame.empty()) m.frame = pole_frame(m.location, bg_->dim());
      base_.push_back(bg_->value(m.location));
    }
  }
  int dim() const override { return bg_->dim(); }

  double value(const Vec4& x) const override {
    double v = bg_->value(x);
    const double k0 = v;
    for (std::size_t i = 0; i < models_.size(); ++i) {
      const auto& m = models_[i];
      if (dot(x, m.location) <= 0.0) continue;
      double r2 = 0.0, prof = base_[i];
      for (std::size_t j = 0; j < m.frame.size(); ++j) {
        const double y = dot(x, m.frame[j]);
        r2 += y * y;
        prof += m.a[j] * std::pow(std::abs(y), m.beta);
      }
      const double chi = 1.0 - smooth_step((std::sqrt(r2) - inner_) / (outer_ - inner_), nullptr);
      v += chi * (prof - k0);
    }
    return v;
  }

  Vec4 gradient(const Vec4& x) const override {
    const double k0 = bg_->value(x);
    const Vec4 g0 = bg_->gradient(x);
    Vec4 g = g0;
    for (std::size_t i = 0; i < models_.size(); ++i) {
      const auto& m = models_[i];
      if (dot(x, m.location) <= 0.0) continue;
      double r2 = 0.0, prof = base_[i];
      Vec4 gp{0.0, 0.0, 0.0, 0.0}, gr{0.0, 0.0, 0.0, 0.0};
      for (std::size_t j = 0; j < m.frame.size(); ++j) {
        const double y = dot(x, m.frame[j]);
        r2 += y * y;
        prof += m.a[j] * std::pow(std::abs(y), m.beta);
        const double sgn = y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
        gp += (m.a[j] * m.beta * std::pow(std::abs(y), m.beta - 1.0) * sgn) * m.frame[j];
        gr += y * m.frame[j];
      }
      const double r = std::sqrt(r2);
      double dS = 0.0;
      const double chi = 1.0 - smooth_step((r - inner_) / (outer_ - inner_), &dS);
      g += chi * (tangential(x, gp) - g0);
      if (dS != 0.0 && r > 0.0) g += (-dS / (outer_ - inner_) * (prof - k0) / r) * tangential(x, gr);
    }
    return tangential(x, g);
  }

  std::string describe() const override {
    return "glued(" + bg_->describe() + ", " + std::to_string(models_.size()) + " models)";
  }

 private:
  SphereFunctionRef bg_;
  std::vector<CriticalPointModel> models_;
  std::vector<double> base_;
  double inner_, outer_;
};

}  // namespace

SphereFunctionRef glued_model(SphereFunctionRef background, std::vector<CriticalPointModel> models, double inner,
                              double outer) {
  if (!(inner > 0.0 && outer > inner && outer < 1.0)) throw DomainError("glued_model: need 0 < inner < outer < 1");
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (dot(models[i].location, models[j].location) > std::sqrt(1.0 - outer * outer) - 1e-12 &&
          norm(models[i].location - models[j].location) < 2.0 * outer)
        throw DomainError("glued_model: caps overlap");
  return std::make_shared<GluedModel>(std::move(background), std::move(models), inner, outer);
}

ModelConfig tilt_model(int n, double eps, double beta) {
  ModelConfig c;
  c.name = "tilt";
  c.background = tilt_function(n, eps);
  CriticalPointModel top, bottom;
  top.location = unit_vector(n);
  top.beta = beta;
  top.a.assign(n, -0.5 * eps);
  bottom.location = -1.0 * unit_vector(n);
  bottom.beta = beta;
  bottom.a.assign(n, 0.5 * eps);
  c.models = {top, bottom};
  c.K = glued_model(c.background, c.models);
  return c;
}

ModelConfig quadratic_model(int n, double offset, const Vec4& coef, double beta) {
  ModelConfig c;
  c.name = "quadratic";
  c.background = quadratic_function(n, offset, 1.0, coef);
  for (int k = 0; k <= n; ++k) {
    for (int side = 0; side < 2; ++side) {
      CriticalPointModel m;
      m.location = (side == 0 ? 1.0 : -1.0) * unit_vector(k);
      m.beta = beta;
      for (int j = 0; j <= n; ++j) {
        if (j == k) continue;
        m.a.push_back(coef[j] - coef[k]);
        m.frame.push_back(unit_vector(j));
      }
      c.models.push_back(m);
    }
  }
  c.K = glued_model(c.background, c.models);
  return c;
}

std::vector<OmegaRow> omega_decay_scan(const SphereFunction& K, const std::vector<Vec4>& P_samples,
                                       const std::vector<double>& t_schedule, const PolarRuleOptions& opt) {
  const int n = K.dim();
  std::vector<OmegaRow> rows;
  for (const Vec4& P : P_samples) {
    for (double t : t_schedule) {
      check_point(P, t, n);
      const PolarRule rule = polar_rule(n, t, opt);
      const double kp = K.value(P);
      double num = 0.0, mass = 0.0;
      Vec4 mom{0.0, 0.0, 0.0, 0.0};
      for_each_polar(rule, -1.0 * P, [&](const Vec4& x, double w) {
        const double k = K.value(phi_apply(P, t, x, n).image);
        num += w * (k - kp) * (k - kp);
        mass += w * std::abs(k);
        mom += (w * k) * x;
      });
      OmegaRow row;
      row.P = P;
      row.t = t;
      row.numerator = num;
      row.denominator = norm(mom);
      // a moment at round-off level counts as zero
      if (!(row.denominator > 1e-12 * mass)) continue;
      row.ratio = num / row.denominator;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace fracsphere
