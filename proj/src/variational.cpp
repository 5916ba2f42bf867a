#include "fracsphere/variational.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fracsphere/errors.hpp"
#include "fracsphere/harmonics.hpp"
#include "fracsphere/special.hpp"

namespace fracsphere {

void SolverConfig::validate(const FracOperatorSpec& spec) const {
  if (!(p > 1.0 && p < spec.sobolev_power())) {
    throw DomainError("solver: exponent p must satisfy 1 < p < " + std::to_string(spec.sobolev_power()));
  }
  if (lmax < 1) throw DomainError("solver: band limit must be positive");
  if (!(initial_step > 0.0) || !(backtrack > 0.0 && backtrack < 1.0)) throw DomainError("solver: bad step rule");
  if (max_iterations < 1 || !(tolerance > 0.0)) throw DomainError("solver: iterations and tolerance must be positive");
}

namespace {

struct Workspace {
  GridRef grid;
  HarmonicTransform transform;
  GridField K;
  double omega;

  Workspace(const SphereFunction& k, int lmax, double power)
      : grid(default_grid(lmax, power)), transform(grid, lmax), K(sample(k, grid)), omega(sphere_volume(2)) {}
};

void zero_odd(SpectralField& c) {
  for (int k = 1; k <= c.lmax; k += 2)
    for (int m = -k; m <= k; ++m) c.at(k, m) = 0.0;
}

double weighted_power(const Workspace& ws, const GridField& v, double e) {
  const auto& w = ws.grid->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * ws.K.values[i] * std::pow(std::abs(v.values[i]), e);
  return s;
}

struct Eval {
  GridField vg;
  double N = 0.0;  // int v P v
  double D = 0.0;  // int K |v|^{p+1}
  double R = 0.0;  // N / D^{2/(p+1)}
};

Eval evaluate(const Workspace& ws, const SpectralField& c, double p, const FracOperatorSpec& spec) {
  Eval e;
  e.vg = ws.transform.inverse(c);
  e.N = hsigma_energy(c, spec);
  e.D = weighted_power(ws, e.vg, p + 1.0);
  e.R = e.D > 0.0 ? e.N / std::pow(e.D, 2.0 / (p + 1.0)) : HUGE_VAL;
  return e;
}

// b = coefficients of K |v|^{p-1} v
SpectralField nonlinear_coeffs(const Workspace& ws, const GridField& vg, double p) {
  GridField f = vg;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = vg.values[i];
    f.values[i] = ws.K.values[i] * std::pow(std::abs(v), p - 1.0) * v;
  }
  return ws.transform.forward(f);
}

double el_residual(const Workspace& ws, const SpectralField& c, const GridField& vg, double lambda, double p,
                   const FracOperatorSpec& spec) {
  const GridField pv = ws.transform.inverse(apply_ps_spectral(c, spec));
  const auto& w = ws.grid->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < vg.size(); ++i) {
    const double v = vg.values[i];
    const double r = pv.values[i] - lambda * ws.K.values[i] * std::pow(std::abs(v), p - 1.0) * v;
    s += w[i] * r * r;
  }
  return std::sqrt(s);
}

void normalize(SpectralField& c, double D, double p) {
  const double scale = std::pow(D, -1.0 / (p + 1.0));
  for (double& x : c.coeffs) x *= scale;
}

void check_antipodal(const SphereFunction& K, const GridRef& grid) {
  for (const Vec4& x : grid->nodes()) {
    if (std::abs(K.value(x) - K.value(-1.0 * x)) > 1e-10) {
      throw DomainError("minimize_subcritical: antipodal symmetry requested but K(x) != K(-x)");
    }
  }
}

SpectralField random_start(const SolverConfig& cfg) {
  SpectralField c(cfg.lmax);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double root = std::sqrt(sphere_volume(2));
  c.at(0, 0) = root;
  for (int k = 1; k <= std::min(cfg.lmax, 6); ++k)
    for (int m = -k; m <= k; ++m) c.at(k, m) = cfg.init_amplitude * root * normal(rng) / ((k + 1.0) * (k + 1.0));
  return c;
}

SolutionRecord run_solver(const SphereFunction& K, const SolverConfig& cfg, SpectralField c,
                          const FracOperatorSpec& spec) {
  if (spec.n != 2 || K.dim() != 2) throw DomainError("minimize_subcritical: the solver is implemented for n = 2");
  cfg.validate(spec);
  const double p = cfg.p;
  Workspace ws(K, cfg.lmax, p + 3.0);
  bool positive_somewhere = false;
  for (double k : ws.K.values) positive_somewhere = positive_somewhere || k > 0.0;
  if (!positive_somewhere) throw DomainError("minimize_subcritical: K is nonpositive everywhere");
  if (cfg.symmetry == Symmetry::antipodal) check_antipodal(K, ws.grid);

  c = c.resized(cfg.lmax);
  if (cfg.symmetry == Symmetry::antipodal) zero_odd(c);
  Eval cur = evaluate(ws, c, p, spec);
  if (!(cur.D > 0.0)) throw DomainError("minimize_subcritical: start has non-positive constraint value");
  normalize(c, cur.D, p);
  cur = evaluate(ws, c, p, spec);

  SolutionRecord rec;
  rec.p = p;
  double step = cfg.initial_step;
  double res = HUGE_VAL;
  int it = 0;
  bool replaced = false;
  for (;;) {
    for (; it < cfg.max_iterations; ++it) {
      rec.objective.push_back(cur.R);
      const SpectralField b = nonlinear_coeffs(ws, cur.vg, p);
      // at D = 1 the Lagrange multiplier equals the energy
      res = el_residual(ws, c, cur.vg, cur.N, p, spec);
      if (res < cfg.tolerance) break;
      SpectralField d(cfg.lmax);
      double slope = 0.0;
      for (int k = 0; k <= cfg.lmax; ++k) {
        const double lam = spec.lambda(k);
        for (int m = -k; m <= k; ++m) {
          const double g = c.at(k, m) - cur.N * b.at(k, m) / lam;
          d.at(k, m) = -g;
          slope -= 2.0 * lam * g * g;
        }
      }
      if (cfg.symmetry == Symmetry::antipodal) zero_odd(d);
      // longer steps only re-excite the high degrees, whose preconditioned curvature is near 1
      step = std::min(step * 2.0, cfg.initial_step);
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt, step *= cfg.backtrack) {
        SpectralField trial = c;
        for (std::size_t i = 0; i < trial.coeffs.size(); ++i) trial.coeffs[i] += step * d.coeffs[i];
        const Eval e = evaluate(ws, trial, p, spec);
        // near convergence the decrease drops below rounding of R; allow that much slack
        if (e.R <= cur.R + 1e-4 * step * slope + 1e-15 * std::abs(cur.R)) {
          c = trial;
          normalize(c, e.D, p);
          cur = evaluate(ws, c, p, spec);
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    double vmin = HUGE_VAL;
    for (double x : cur.vg.values) vmin = std::min(vmin, x);
    if (vmin >= 0.0 || replaced) break;
    // |v| has no larger energy; restart once from it
    GridField a = cur.vg;
    for (double& x : a.values) x = std::abs(x);
    c = ws.transform.forward(a);
    if (cfg.symmetry == Symmetry::antipodal) zero_odd(c);
    cur = evaluate(ws, c, p, spec);
    normalize(c, cur.D, p);
    cur = evaluate(ws, c, p, spec);
    replaced = true;
    rec.abs_replaced = true;
  }

  rec.v = c;
  rec.v_grid = cur.vg;
  rec.energy = cur.N;
  rec.constraint = cur.D;
  rec.lambda = cur.N;
  rec.el_residual = res;
  rec.iterations = it;
  double vmin = HUGE_VAL, vmax = -HUGE_VAL;
  for (double x : cur.vg.values) {
    vmin = std::min(vmin, x);
    vmax = std::max(vmax, x);
  }
  const double mean = quadrature(cur.vg) / ws.omega;
  rec.sup_over_mean = mean > 0.0 ? vmax / mean : HUGE_VAL;
  rec.converged = res < cfg.tolerance && vmin > 0.0 && std::abs(cur.D - 1.0) < 1e-8;
  rec.kw_residual = kw_residual(cur.vg, K, spec).scaled;
  if (rec.converged && vmin > 0.0) {
    const Multipliers mult = multiplier_solve(cur.vg, K, spec);
    rec.has_Lambda = true;
    rec.Lambda = mult.Lambda;
  }
  return rec;
}

}  // namespace

SolutionRecord minimize_subcritical(const SphereFunction& K, const SolverConfig& cfg, const FracOperatorSpec& spec) {
  cfg.validate(spec);
  return run_solver(K, cfg, random_start(cfg), spec);
}

SolutionRecord minimize_subcritical(const SphereFunction& K, const SolverConfig& cfg, const SpectralField& start,
                                    const FracOperatorSpec& spec) {
  return run_solver(K, cfg, start, spec);
}

std::vector<SolutionRecord> continuation_to_critical(const SphereFunction& K, const std::vector<double>& schedule,
                                                     const SolverConfig& cfg, const FracOperatorSpec& spec) {
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i] > schedule[i - 1])) throw DomainError("continuation_to_critical: schedule must increase");
  }
  std::vector<SolutionRecord> out;
  SpectralField start;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    SolverConfig stage = cfg;
    stage.p = schedule[i];
    SolutionRecord rec = i == 0 ? minimize_subcritical(K, stage, spec) : minimize_subcritical(K, stage, start, spec);
    start = rec.v;
    const bool ok = rec.converged;
    out.push_back(std::move(rec));
    if (!ok) break;
  }
  return out;
}

namespace {

// integrals of <grad K, grad x_i> |v|^q = (grad K)_i |v|^q
Vec4 kw_integrals(const GridField& v, const SphereFunction& K, double q, double& max_grad, double& mass) {
  const auto& nodes = v.grid->nodes();
  const auto& w = v.grid->weights();
  Vec4 r{0.0, 0.0, 0.0, 0.0};
  max_grad = 0.0;
  mass = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec4 g = K.gradient(nodes[i]);
    const double f = w[i] * std::pow(std::abs(v.values[i]), q);
    r += f * g;
    mass += f;
    max_grad = std::max(max_grad, norm(g));
  }
  return r;
}

}  // namespace

KWResult kw_residual(const GridField& v, const SphereFunction& K, const FracOperatorSpec& spec) {
  KWResult r;
  double max_grad = 0.0, mass = 0.0;
  r.integrals = kw_integrals(v, K, spec.critical_exponent(), max_grad, mass);
  r.norm = norm(r.integrals);
  r.scaled = max_grad > 0.0 && mass > 0.0 ? r.norm / (max_grad * mass) : 0.0;
  return r;
}

Multipliers multiplier_solve(const GridField& v, const SphereFunction& K, const FracOperatorSpec& spec) {
  if (spec.n != 2) throw DomainError("multiplier_solve: needs the n = 2 spectral energy");
  const int dim = spec.n + 1;
  const double q = spec.critical_exponent();
  const auto& nodes = v.grid->nodes();
  const auto& w = v.grid->weights();
  for (double x : v.values)
    if (!(x > 0.0)) throw DomainError("multiplier_solve: v must be positive");

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim, dim);
  double kmass = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = w[i] * std::pow(v.values[i], q);
    kmass += f * K.value(nodes[i]);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) G(a, b) += f * ((a == b ? 1.0 : 0.0) - nodes[i][a] * nodes[i][b]);
  }
  Multipliers out;
  const double energy = hsigma_energy(sht_forward(v, v.grid->max_band_limit()), spec);
  if (!(kmass > 0.0)) throw DomainError("multiplier_solve: int K v^crit must be positive");
  out.lambda = energy / kmass;
  double max_grad = 0.0, mass = 0.0;
  const Vec4 kw = kw_integrals(v, K, q, max_grad, mass);
  Eigen::VectorXd rhs(dim);
  for (int a = 0; a < dim; ++a) rhs(a) = out.lambda * kw[a];
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw DomainError("multiplier_solve: Gram matrix is not positive definite");
  const Eigen::VectorXd L = llt.solve(rhs);
  for (int a = 0; a < dim; ++a) {
    out.Lambda[a] = L(a);
    for (int b = 0; b < dim; ++b) out.gram[4 * a + b] = G(a, b);
  }
  return out;
}

double quadratic_form_Q(const SpectralField& wtilde, const FracOperatorSpec& spec) {
  double scale = 0.0;
  for (double c : wtilde.coeffs) scale = std::max(scale, std::abs(c));
  for (int k = 0; k <= std::min(1, wtilde.lmax); ++k)
    for (int m = -k; m <= k; ++m)
      if (std::abs(wtilde.at(k, m)) > 1e-14 * std::max(scale, 1.0))
        throw DomainError("quadratic_form_Q: w~ must have no degree 0 or 1 content");
  const double l1 = spec.lambda(1);
  double q = 0.0;
  for (int k = 2; k <= wtilde.lmax; ++k) {
    double s = 0.0;
    for (int m = -k; m <= k; ++m) s += wtilde.at(k, m) * wtilde.at(k, m);
    q += (spec.lambda(k) - l1) * s;
  }
  return q / spec.volume();
}

ExpansionCheck expansion_check_E(const SpectralField& wtilde, const FracOperatorSpec& spec) {
  if (spec.n != 2) throw DomainError("expansion_check_E: n = 2 only");
  const int L = std::max(wtilde.lmax, 1);
  const GridRef grid = default_grid(L, 4.0);
  const double p = spec.critical_exponent();
  const MuEta me = mu_eta_solve(wtilde, p, grid);
  ExpansionCheck r;
  r.mu = me.mu;
  r.eta = me.eta;
  SpectralField w = wtilde.resized(L);
  const double root = std::sqrt(spec.volume());
  w.at(0, 0) += (1.0 + me.mu) * root;
  // x, y, z = sqrt(4 pi / 3) (Y_1^1, Y_1^-1, Y_1^0)
  const double c1 = std::sqrt(spec.volume() / 3.0);
  w.at(1, 1) += c1 * me.eta[0];
  w.at(1, -1) += c1 * me.eta[1];
  w.at(1, 0) += c1 * me.eta[2];
  r.lhs = functional_EK(w, GridField(grid, 1.0), spec);
  r.rhs = spec.p1() + quadratic_form_Q(wtilde, spec);
  r.gap = r.lhs - r.rhs;
  return r;
}

}  // namespace fracsphere
