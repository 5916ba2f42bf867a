#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "fracsphere/errors.hpp"
#include "fracsphere/harmonics.hpp"
#include "fracsphere/special.hpp"
#include "fracsphere/variational.hpp"

namespace fracsphere {

namespace {

// Objective h(E, S) with E = avg(v P v) and S = avg(v^2), minimized over M_0^p.
struct Objective {
  virtual ~Objective() = default;
  virtual double value(double E, double S) const = 0;
  // partial derivatives in E and S
  virtual void partials(double E, double S, double& hE, double& hS) const = 0;
};

// h = -(P(1) - a E) / S
struct AubinObjective : Objective {
  double a, l0;
  AubinObjective(double a_, double l0_) : a(a_), l0(l0_) {}
  double value(double E, double S) const override { return -(l0 - a * E) / S; }
  void partials(double E, double S, double& hE, double& hS) const override {
    hE = a / S;
    hS = (l0 - a * E) / (S * S);
  }
};

// h = a E + (1 - a) P(1) S - P(1)
struct SobolevObjective : Objective {
  double a, l0;
  SobolevObjective(double a_, double l0_) : a(a_), l0(l0_) {}
  double value(double E, double S) const override { return a * E + (1.0 - a) * l0 * S - l0; }
  void partials(double, double, double& hE, double& hS) const override {
    hE = a;
    hS = (1.0 - a) * l0;
  }
};

struct Explorer {
  const FracOperatorSpec& spec;
  double p;
  int L;
  GridRef grid;
  HarmonicTransform tr;
  double omega;
  double c1;  // x = c1 Y_1^1 etc.

  Explorer(const FracOperatorSpec& s, double p_, int lmax)
      : spec(s), p(p_), L(lmax), grid(default_grid(lmax, p_ + 3.0)), tr(grid, lmax), omega(s.volume()),
        c1(std::sqrt(s.volume() / 3.0)) {}

  double energy_avg(const SpectralField& c) const { return hsigma_energy(c, spec) / omega; }
  double l2_avg(const SpectralField& c) const {
    double s = 0.0;
    for (double x : c.coeffs) s += x * x;
    return s / omega;
  }

  // moves c onto M_0^p by adding mu + eta.x
  void retract(SpectralField& c) const {
    const MuEta me = mu_eta_project(tr.inverse(c), p);
    c.at(0, 0) += me.mu * std::sqrt(omega);
    c.at(1, 1) += c1 * me.eta[0];
    c.at(1, -1) += c1 * me.eta[1];
    c.at(1, 0) += c1 * me.eta[2];
  }

  // coefficients of the L^2(avg) gradients of avg(|v|^p phi_j), phi = (1, x, y, z)
  std::vector<SpectralField> constraint_gradients(const SpectralField& c) const {
    const GridField vg = tr.inverse(c);
    std::vector<SpectralField> out;
    for (int j = 0; j < 4; ++j) {
      GridField f = vg;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = vg.values[i];
        const double phi = j == 0 ? 1.0 : grid->nodes()[i][j - 1];
        f.values[i] = p * std::pow(std::abs(v), p - 2.0) * v * phi;
      }
      out.push_back(tr.forward(f));
    }
    return out;
  }

  // projected, preconditioned descent direction
  SpectralField direction(const SpectralField& c, const Objective& h, double& slope) const {
    const double E = energy_avg(c), S = l2_avg(c);
    double hE, hS;
    h.partials(E, S, hE, hS);
    const std::size_t nc = c.coeffs.size();
    // gradient of h w.r.t. coefficients, scaled by omega / 2
    std::vector<double> g(nc), pinv(nc);
    for (int k = 0; k <= L; ++k) {
      const double lam = spec.lambda(k);
      for (int m = -k; m <= k; ++m) {
        const std::size_t i = SpectralField::index(k, m);
        g[i] = (hE * lam + hS) * c.coeffs[i];
        pinv[i] = 1.0 / lam;
      }
    }
    const std::vector<SpectralField> G = constraint_gradients(c);
    Eigen::Matrix4d A;
    Eigen::Vector4d rhs;
    for (int a = 0; a < 4; ++a) {
      double r = 0.0;
      for (std::size_t i = 0; i < nc; ++i) r += G[a].coeffs[i] * pinv[i] * g[i];
      rhs(a) = r;
      for (int b = 0; b < 4; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < nc; ++i) s += G[a].coeffs[i] * pinv[i] * G[b].coeffs[i];
        A(a, b) = s;
      }
    }
    const Eigen::Vector4d beta = A.fullPivLu().solve(rhs);
    SpectralField d(L);
    slope = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
      double gi = g[i];
      for (int a = 0; a < 4; ++a) gi -= beta(a) * G[a].coeffs[i];
      d.coeffs[i] = -pinv[i] * gi;
      slope += d.coeffs[i] * g[i];
    }
    slope *= 2.0 / omega;
    return d;
  }

  double objective(const SpectralField& c, const Objective& h) const { return h.value(energy_avg(c), l2_avg(c)); }

  void descend(SpectralField& c, const Objective& h, int iterations) const {
    double step = 1.0;
    double cur = objective(c, h);
    for (int it = 0; it < iterations; ++it) {
      double slope = 0.0;
      const SpectralField d = direction(c, h, slope);
      if (!(slope < -1e-15)) break;
      step = std::min(2.0 * step, 4.0);
      bool accepted = false;
      for (int bt = 0; bt < 30; ++bt, step *= 0.5) {
        SpectralField trial = c;
        for (std::size_t i = 0; i < trial.coeffs.size(); ++i) trial.coeffs[i] += step * d.coeffs[i];
        try {
          retract(trial);
        } catch (const ConvergenceError&) {
          continue;
        }
        const double val = objective(trial, h);
        if (val <= cur + 1e-4 * step * slope) {
          c = trial;
          cur = val;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
  }

  SpectralField start(std::mt19937_64& rng, double amplitude) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    SpectralField c(L);
    const double root = std::sqrt(omega);
    c.at(0, 0) = root;
    for (int k = 1; k <= L; ++k)
      for (int m = -k; m <= k; ++m) c.at(k, m) = amplitude * root * normal(rng) / (k + 1.0);
    return c;
  }
};

void check_inputs(double p, int samples, const FracOperatorSpec& spec, const AubinConfig& cfg) {
  if (spec.n != 2) throw DomainError("aubin explorers: n = 2 only");
  if (samples < 1) throw DomainError("aubin explorers: at least one sample is required");
  if (!(p > 2.0 && p <= spec.critical_exponent() + 1e-12)) {
    throw DomainError("aubin explorers: p must lie in (2, 2n/(n - 2 sigma)]");
  }
  if (cfg.lmax < 2 || cfg.iterations < 1) throw DomainError("aubin explorers: bad configuration");
}

// runs the sampled descents; returns objective values at the end points
std::vector<double> explore(const Explorer& ex, const Objective& h, int samples, const AubinConfig& cfg,
                            int& skipped, std::vector<SpectralField>* points) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> values;
  skipped = 0;
  for (int s = 0; s < samples; ++s) {
    // the first start is the constant; a start whose projection fails is retried
    // closer to it with the same random direction
    const SpectralField raw = ex.start(rng, s == 0 ? 0.0 : cfg.amplitude);
    SpectralField c;
    bool projected = false;
    for (int attempt = 0; attempt < 5 && !projected; ++attempt) {
      c = raw;
      const double shrink = std::ldexp(1.0, -attempt);
      for (std::size_t i = 1; i < c.coeffs.size(); ++i) c.coeffs[i] *= shrink;
      try {
        ex.retract(c);
        projected = true;
      } catch (const ConvergenceError&) {
      }
    }
    if (!projected) {
      ++skipped;
      continue;
    }
    ex.descend(c, h, cfg.iterations);
    values.push_back(ex.objective(c, h));
    if (points) points->push_back(c);
  }
  return values;
}

}  // namespace

AubinReport aubin_explore(double p, double eps, int samples, const AubinConfig& cfg, const FracOperatorSpec& spec) {
  check_inputs(p, samples, spec, cfg);
  if (!(eps > 0.0)) throw DomainError("aubin_explore: epsilon must be positive");
  const Explorer ex(spec, p, cfg.lmax);
  const double a = std::pow(2.0, 2.0 / p - 1.0) * (1.0 + eps);
  const double l0 = spec.p1();
  const AubinObjective h(a, l0);
  AubinReport r;
  r.p = p;
  r.parameter = eps;
  r.samples = samples;
  r.seed = cfg.seed;
  std::vector<SpectralField> points;
  const std::vector<double> vals = explore(ex, h, samples, cfg, r.skipped, &points);
  double best = -HUGE_VAL;
  for (double v : vals) {
    r.sample_values.push_back(-v);
    best = std::max(best, -v);
  }
  r.empirical_constant = std::max(0.0, best);
  r.worst_gap = HUGE_VAL;
  for (const SpectralField& c : points) {
    const double gap = a * ex.energy_avg(c) + r.empirical_constant * ex.l2_avg(c) - l0;
    r.worst_gap = std::min(r.worst_gap, gap);
  }
  r.violation = r.worst_gap < -1e-9;
  return r;
}

AubinReport aubin_sobolev_explore(double p, double a, int samples, const AubinConfig& cfg,
                                  const FracOperatorSpec& spec) {
  check_inputs(p, samples, spec, cfg);
  if (!(a > 0.0 && a < 1.0)) throw DomainError("aubin_sobolev_explore: a must lie in (0, 1)");
  const Explorer ex(spec, p, cfg.lmax);
  const SobolevObjective h(a, spec.p1());
  AubinReport r;
  r.p = p;
  r.parameter = a;
  r.samples = samples;
  r.seed = cfg.seed;
  r.empirical_constant = a;
  const std::vector<double> vals = explore(ex, h, samples, cfg, r.skipped, nullptr);
  r.worst_gap = HUGE_VAL;
  for (double v : vals) {
    r.sample_values.push_back(v);
    r.worst_gap = std::min(r.worst_gap, v);
  }
  r.violation = r.worst_gap < -1e-9;
  return r;
}

}  // namespace fracsphere
