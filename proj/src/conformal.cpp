#include "fracsphere/conformal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>

#include "fracsphere/errors.hpp"
#include "fracsphere/harmonics.hpp"
#include "fracsphere/special.hpp"

namespace fracsphere {

ConformalParam::ConformalParam(const Vec4& pole, double dilation) : P(pole), t(dilation) {
  if (std::abs(norm(P) - 1.0) > 1e-12) throw DomainError("ConformalParam: pole must be a unit vector");
  if (!(t >= 1.0) || !std::isfinite(t)) throw DomainError("ConformalParam: dilation t must be >= 1");
}

ConformalParam ConformalParam::from_ball(const Vec4& p, int n) {
  const double s = norm(p);
  if (!(s < 1.0)) throw DomainError("ConformalParam::from_ball: point outside the open ball");
  ConformalParam c;
  if (s == 0.0) {
    c.P = unit_vector(n);
    c.t = 1.0;
    return c;
  }
  c.P = (1.0 / s) * p;
  c.t = 1.0 / (1.0 - s);
  return c;
}

ConformalParam ConformalParam::inverse() const {
  ConformalParam c;
  c.P = -1.0 * P;
  c.t = t;
  return c;
}

std::vector<Vec4> pole_frame(const Vec4& P, int n) {
  std::vector<Vec4> frame;
  for (int i = 0; i <= n && static_cast<int>(frame.size()) < n; ++i) {
    Vec4 e = unit_vector(i);
    e = e - dot(e, P) * P;
    for (const Vec4& f : frame) e = e - dot(e, f) * f;
    const double len = norm(e);
    if (len > 1e-8) frame.push_back((1.0 / len) * e);
  }
  // (e1, e2, P) right-handed on S^2
  if (n == 2 && dot(cross3(frame[0], frame[1]), P) < 0.0) frame[1] = -1.0 * frame[1];
  return frame;
}

Vec4 stereo_project(const Vec4& x, const Vec4& P, int n) {
  const double xp = dot(x, P);
  if (1.0 - xp < 1e-15) throw DomainError("stereo_project: point is the projection pole");
  const std::vector<Vec4> frame = pole_frame(P, n);
  Vec4 y{0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) y[i] = dot(x, frame[i]) / (1.0 - xp);
  return y;
}

Vec4 stereo_lift(const Vec4& y, const Vec4& P, int n) {
  const std::vector<Vec4> frame = pole_frame(P, n);
  const double r2 = dot(y, y);
  Vec4 x = ((r2 - 1.0) / (r2 + 1.0)) * P;
  for (int i = 0; i < n; ++i) x += (2.0 * y[i] / (1.0 + r2)) * frame[i];
  return x;
}

double stereo_jacobian(const Vec4& y, int n) { return std::pow(2.0 / (1.0 + dot(y, y)), n); }

MappedPoint phi_apply(const Vec4& P, double t, const Vec4& x, int n) {
  const double xp = dot(x, P);
  const Vec4 xperp = x - xp * P;
  const double D = (1.0 - xp) + t * t * (1.0 + xp);
  const double N = t * t * (1.0 + xp) - (1.0 - xp);
  const double scale = 2.0 * t / D;
  MappedPoint m;
  m.image = scale * xperp + (N / D) * P;
  m.jacobian = std::pow(scale, n);
  return m;
}

MappedPoint phi_apply(const ConformalParam& param, const Vec4& x, int n) { return phi_apply(param.P, param.t, x, n); }

std::array<double, 16> phi_differential(const Vec4& P, double t, const Vec4& x) {
  const double xp = dot(x, P);
  const Vec4 xperp = x - xp * P;
  const double t2 = t * t;
  const double D = (1.0 - xp) + t2 * (1.0 + xp);
  const double N = t2 * (1.0 + xp) - (1.0 - xp);
  const double scale = 2.0 * t / D;
  const Vec4 a = (-2.0 * t * (t2 - 1.0) / (D * D)) * xperp + (((t2 + 1.0) * D - N * (t2 - 1.0)) / (D * D)) * P;
  std::array<double, 16> J{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) J[4 * i + j] = scale * ((i == j ? 1.0 : 0.0) - P[i] * P[j]) + a[i] * P[j];
  return J;
}

Vec4 pullback_gradient(const Vec4& P, double t, const Vec4& x, const Vec4& g) {
  const std::array<double, 16> J = phi_differential(P, t, x);
  Vec4 out{0.0, 0.0, 0.0, 0.0};
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) out[j] += J[4 * i + j] * g[i];
  return tangential(x, out);
}

PointEval point_eval(const SpectralField& c) {
  auto ev = std::make_shared<HarmonicEvaluator>(c.lmax);
  return [ev, c](const Vec4& x) { return ev->value(c, x); };
}

PointEval pushforward_eval(PointEval v, const ConformalParam& param, const FracOperatorSpec& spec) {
  const double a = (spec.n - 2.0 * spec.sigma) / (2.0 * spec.n);
  const int n = spec.n;
  return [v = std::move(v), param, a, n](const Vec4& x) {
    const MappedPoint m = phi_apply(param, x, n);
    return v(m.image) * std::pow(m.jacobian, a);
  };
}

PointEval varpi(PointEval w, const ConformalParam& param, const FracOperatorSpec& spec) {
  return pushforward_eval(std::move(w), param.inverse(), spec);
}

GridField pushforward_T(const PointEval& v, const ConformalParam& param, const GridRef& grid,
                        const FracOperatorSpec& spec) {
  if (grid->dim() != spec.n) throw DomainError("pushforward_T: grid dimension differs from the operator's");
  const PointEval tv = pushforward_eval(v, param, spec);
  GridField out(grid);
  const auto& nodes = grid->nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) out.values[i] = tv(nodes[i]);
  return out;
}

GridField pushforward_T(const SpectralField& v, const ConformalParam& param, const GridRef& grid,
                        const FracOperatorSpec& spec) {
  return pushforward_T(point_eval(v), param, grid, spec);
}

PushforwardResult pushforward_T(const GridField& v, const ConformalParam& param, const FracOperatorSpec& spec) {
  PushforwardResult r;
  r.band_limit = v.grid->max_band_limit();
  const SpectralField c = sht_forward(v, r.band_limit);
  double top = 0.0, all = 0.0;
  for (int k = 0; k <= c.lmax; ++k) {
    for (int m = -k; m <= k; ++m) {
      const double x = c.at(k, m) * c.at(k, m);
      all += x;
      if (k > c.lmax - 2) top += x;
    }
  }
  r.tail = all > 0.0 ? std::sqrt(top / all) : 0.0;
  r.tail_warning = r.tail > 1e-10;
  r.field = pushforward_T(c, param, v.grid, spec);
  return r;
}

Vec4 center_of_mass(const GridField& v, const FracOperatorSpec& spec) {
  const double q = spec.critical_exponent();
  const auto& nodes = v.grid->nodes();
  const auto& w = v.grid->weights();
  Vec4 m{0.0, 0.0, 0.0, 0.0};
  double mass = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = w[i] * std::pow(std::abs(v.values[i]), q);
    mass += f;
    m += f * nodes[i];
  }
  if (!(mass > 0.0)) throw DomainError("center_of_mass: field vanishes on the grid");
  return (1.0 / mass) * m;
}

namespace {

double critical_norm_avg(const GridField& v, double q) {
  const auto& w = v.grid->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::pow(std::abs(v.values[i]), q);
  return s / sphere_volume(v.grid->dim());
}

}  // namespace

NormalizedPair decompose_varpi(const PointEval& v, const GridRef& grid, const FracOperatorSpec& spec,
                               const VarpiOptions& opt) {
  const int n = spec.n;
  const int dim = n + 1;
  const double q = spec.critical_exponent();
  GridField sampled(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) sampled.values[i] = v(grid->nodes()[i]);
  const double c = std::pow(critical_norm_avg(sampled, q), -1.0 / q);
  const PointEval vn = [&v, c](const Vec4& x) { return c * v(x); };

  auto pushed = [&](const Vec4& p) { return pushforward_T(vn, ConformalParam::from_ball(p, n), grid, spec); };
  auto residual = [&](const Vec4& p) { return center_of_mass(pushed(p), spec); };

  Vec4 p{0.0, 0.0, 0.0, 0.0};
  Vec4 F = residual(p);
  // the center of mass of v itself points the right way and is a usable start
  {
    const Vec4 p0 = center_of_mass(sampled, spec);
    if (norm(p0) < opt.max_radius) {
      const Vec4 F0 = residual(p0);
      if (norm(F0) < norm(F)) {
        p = p0;
        F = F0;
      }
    }
  }

  int it = 0;
  for (; it < opt.max_iterations && norm(F) > opt.tolerance; ++it) {
    Eigen::MatrixXd J(dim, dim);
    for (int j = 0; j < dim; ++j) {
      Vec4 pp = p;
      pp[j] += opt.fd_step;
      Vec4 pm = p;
      pm[j] -= opt.fd_step;
      const Vec4 Fp = residual(pp), Fm = residual(pm);
      for (int i = 0; i < dim; ++i) J(i, j) = (Fp[i] - Fm[i]) / (2.0 * opt.fd_step);
    }
    Eigen::VectorXd rhs(dim);
    for (int i = 0; i < dim; ++i) rhs(i) = -F[i];
    const Eigen::VectorXd dp = J.fullPivLu().solve(rhs);
    double step = 1.0;
    bool accepted = false;
    for (int b = 0; b < 40; ++b, step *= 0.5) {
      Vec4 trial = p;
      for (int i = 0; i < dim; ++i) trial[i] += step * dp(i);
      if (norm(trial) >= opt.max_radius) continue;
      const Vec4 Ft = residual(trial);
      if (norm(Ft) < norm(F)) {
        p = trial;
        F = Ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (norm(F) > std::max(opt.tolerance, 1e-10)) {
    throw ConvergenceError("decompose_varpi: Newton stalled (p near the ball boundary or v too concentrated)",
                           norm(F), it);
  }
  NormalizedPair out;
  out.param = ConformalParam::from_ball(p, n);
  out.w = pushed(p);
  out.iterations = it;
  out.residual = norm(F);
  return out;
}

NormalizedPair decompose_varpi(const SpectralField& v, const GridRef& grid, const FracOperatorSpec& spec,
                               const VarpiOptions& opt) {
  return decompose_varpi(point_eval(v), grid, spec, opt);
}

MuEta mu_eta_project(const GridField& base, double p, int max_iterations, double tolerance) {
  const GridRef& grid = base.grid;
  const int dim = grid->dim() + 1;
  const double omega = sphere_volume(grid->dim());
  const auto& nodes = grid->nodes();
  const auto& w = grid->weights();
  MuEta r;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim + 1);  // (mu, eta)

  auto evaluate = [&](const Eigen::VectorXd& u, Eigen::VectorXd& F, Eigen::MatrixXd* J) {
    F.setZero(dim + 1);
    if (J) J->setZero(dim + 1, dim + 1);
    double phi[5];
    for (std::size_t i = 0; i < base.size(); ++i) {
      phi[0] = 1.0;
      for (int j = 0; j < dim; ++j) phi[j + 1] = nodes[i][j];
      double val = base.values[i] + u(0);
      for (int j = 0; j < dim; ++j) val += u(j + 1) * nodes[i][j];
      const double a = std::abs(val);
      const double fp = std::pow(a, p);
      F(0) += w[i] * fp;
      for (int j = 0; j < dim; ++j) F(j + 1) += w[i] * fp * nodes[i][j];
      if (J) {
        const double d = p * std::pow(a, p - 1.0) * (val < 0.0 ? -1.0 : 1.0) * w[i];
        for (int a1 = 0; a1 <= dim; ++a1)
          for (int b1 = 0; b1 <= dim; ++b1) (*J)(a1, b1) += d * phi[a1] * phi[b1];
      }
    }
    F /= omega;
    F(0) -= 1.0;
    if (J) *J /= omega;
  };

  Eigen::VectorXd F(dim + 1);
  Eigen::MatrixXd J(dim + 1, dim + 1);
  evaluate(x, F, &J);
  int it = 0;
  for (; it < max_iterations && F.norm() > tolerance; ++it) {
    const Eigen::VectorXd dx = J.fullPivLu().solve(-F);
    double step = 1.0;
    bool ok = false;
    Eigen::VectorXd Ft(dim + 1);
    for (int b = 0; b < 30; ++b, step *= 0.5) {
      const Eigen::VectorXd trial = x + step * dx;
      evaluate(trial, Ft, nullptr);
      if (Ft.norm() < F.norm()) {
        x = trial;
        ok = true;
        break;
      }
    }
    if (!ok) break;
    evaluate(x, F, &J);
  }
  r.iterations = it;
  r.residual = F.norm();
  if (!(r.residual <= std::max(tolerance, 1e-11))) {
    throw ConvergenceError("mu_eta_project: Newton did not converge", r.residual, it);
  }
  r.mu = x(0);
  for (int j = 0; j < dim; ++j) r.eta[j] = x(j + 1);
  r.field = base;
  for (std::size_t i = 0; i < base.size(); ++i) {
    double val = base.values[i] + r.mu;
    for (int j = 0; j < dim; ++j) val += r.eta[j] * nodes[i][j];
    r.field.values[i] = val;
  }
  return r;
}

MuEta mu_eta_solve(const SpectralField& wtilde, double p, const GridRef& grid) {
  double scale = 0.0;
  for (double c : wtilde.coeffs) scale = std::max(scale, std::abs(c));
  for (int k = 0; k <= std::min(1, wtilde.lmax); ++k)
    for (int m = -k; m <= k; ++m)
      if (std::abs(wtilde.at(k, m)) > 1e-14 * std::max(scale, 1.0))
        throw DomainError("mu_eta_solve: w~ must have no degree 0 or 1 content");
  GridField base = sht_inverse(wtilde, grid);
  for (double& v : base.values) v += 1.0;
  return mu_eta_project(base, p);
}

}  // namespace fracsphere
