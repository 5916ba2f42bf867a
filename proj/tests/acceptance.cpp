// One PASS/FAIL line per acceptance criterion; exit status 1 when any fails.
#include <boost/math/quadrature/exp_sinh.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "fracsphere/bubbles.hpp"
#include "fracsphere/conformal.hpp"
#include "fracsphere/degree.hpp"
#include "fracsphere/harmonics.hpp"
#include "fracsphere/special.hpp"
#include "fracsphere/variational.hpp"

using namespace fracsphere;

namespace {

constexpr double pi = std::numbers::pi;
const FracOperatorSpec half(2, 0.5);

struct Outcome {
  bool pass = false;
  double value = 0.0;
  double tol = 0.0;
  std::string detail;
};

int failures = 0;

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

void criterion(int id, const char* tag, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %2d %s value=%.3e tol=%.3e time=%.1fs%s%s\n", o.pass ? "PASS" : "FAIL", id, tag, o.value, o.tol, secs,
              o.detail.empty() ? "" : " ", o.detail.c_str());
  std::fflush(stdout);
}

SpectralField random_field(int lmax, std::mt19937_64& rng, int kmin = 0) {
  std::normal_distribution<double> g(0.0, 1.0);
  SpectralField c(lmax);
  for (int k = kmin; k <= lmax; ++k)
    for (int m = -k; m <= k; ++m) c.at(k, m) = g(rng);
  return c;
}

Vec4 random_point(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  return normalized(Vec4{g(rng), g(rng), g(rng), 0.0});
}

double l2_rel(const GridField& a, const GridField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = a.grid->weights()[i];
    num += w * (a[i] - b[i]) * (a[i] - b[i]);
    den += w * b[i] * b[i];
  }
  return std::sqrt(num / den);
}

double critical_integral(const GridField& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f.grid->weights()[i] * std::pow(std::abs(f[i]), 4);
  return s;
}

}  // namespace

int main() {
  criterion(1, "eigenvalue-closed-form", [] {
    double worst = 0.0;
    for (int k = 0; k <= 64; ++k) worst = std::max(worst, std::abs(eigenvalue(k, 2, 0.5) - (k + 0.5)));
    return Outcome{worst < 1e-12, worst, 1e-12, ""};
  });

  criterion(2, "singular-vs-spectral", [] {
    std::mt19937_64 rng(2024);
    const auto g = SphereGrid::build(2, {128, 256});
    double op = 0.0, inv = 0.0;
    for (int s = 0; s < 10; ++s) {
      const SpectralField c = random_field(8, rng);
      const GridField v = sht_inverse(c, g);
      const GridField pv = sht_inverse(apply_ps_spectral(c, half), g);
      op = std::max(op, l2_rel(apply_ps_singular(v, half), pv));
      const GridField back = riesz_potential(pv, half);
      double e = 0.0, m = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        e = std::max(e, std::abs(back[i] - v[i]));
        m = std::max(m, std::abs(v[i]));
      }
      inv = std::max(inv, e / m);
    }
    return Outcome{op < 1e-3 && inv < 1e-3, std::max(op, inv), 1e-3,
                   "operator " + sci(op) + ", riesz-inversion " + sci(inv)};
  });

  criterion(3, "bubble-equation", [] {
    const Bubble b(normalized(Vec4{0.2, -0.4, 0.9, 0.0}), 1.5, half);
    const double res = bubble_residual(b, 64);
    const double mass = std::abs(critical_integral(bubble_field(b, default_grid(64))) - 4 * pi);
    return Outcome{res < 1e-8 && mass < 1e-8, std::max(res, mass), 1e-8, ""};
  });

  criterion(4, "conformal-invariance", [] {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(1.0, 4.0);
    const int L = 96;
    const GridRef g = default_grid(L);
    double drift = 0.0;
    for (int s = 0; s < 20; ++s) {
      SpectralField v(4);
      std::normal_distribution<double> gauss(0.0, 0.3);
      for (auto& c : v.coeffs) c = gauss(rng);
      v.at(0, 0) += 4.0;
      const ConformalParam par(random_point(rng), u(rng));
      const GridField w = pushforward_T(v, par, g, half);
      const double e = std::abs(hsigma_energy(sht_forward(w, L), half) / hsigma_energy(v, half) - 1.0);
      const double q = std::abs(critical_integral(w) / critical_integral(sht_inverse(v, g)) - 1.0);
      drift = std::max({drift, e, q});
    }
    return Outcome{drift < 1e-6, drift, 1e-6, ""};
  });

  criterion(5, "interaction-constant", [] {
    boost::math::quadrature::exp_sinh<double> es;
    const double radial = es.integrate([](double r) { return 4.0 * r * std::pow(1.0 + r * r, -1.5); });
    const double A = std::pow(2.0, -0.5) * 2 * pi * radial;
    bool monotone = true;
    double prev = 1e300, rel = 0.0;
    for (double x : {0.1, 0.05, 0.025}) {
      const double gap = std::abs(interaction_integral(1.0 + x, half) / std::sqrt(x) - A);
      monotone = monotone && gap < prev;
      prev = gap;
      rel = gap / A;
    }
    const double closed = std::abs(interaction_constant(half) - A) / A;
    return Outcome{monotone && rel < 0.05 && closed < 1e-10, rel, 0.05,
                   std::string("A=") + sci(A) + (monotone ? ", monotone" : ", not monotone")};
  });

  criterion(6, "test-function-criterion", [] {
    const QuotientResult q = test_quotient(*constant_function(2, 1.0), 1.05, {0.0, 0.0, 1.0, 0.0}, half);
    const double bound = half.p1() * std::sqrt(4 * pi) * std::sqrt(2.0);
    const bool ok = q.quotient < bound && q.margin > 0.0 && std::abs(q.bound - bound) < 1e-12;
    return Outcome{ok, q.margin, 0.0, "quotient " + sci(q.quotient) + " bound " + sci(bound)};
  });

  criterion(7, "kazdan-warner", [] {
    const GridRef g = default_grid(16, 5.0);
    const double c = kw_residual(GridField(g, 1.0), *constant_function(2, 1.0), half).norm;
    SolverConfig cfg;
    cfg.p = 2.5;
    cfg.symmetry = Symmetry::antipodal;
    const SolutionRecord r = minimize_subcritical(*even_band_function(2, 0.2), cfg, half);
    const bool ok = c < 1e-12 && r.converged && r.kw_residual < 1e-4;
    return Outcome{ok, r.kw_residual, 1e-4, "constant K " + sci(c)};
  });

  criterion(8, "subcritical-solver", [] {
    const auto K = constant_function(2, 1.0);
    SolverConfig cfg;
    cfg.p = 2.5;
    const SolutionRecord r = minimize_subcritical(*K, cfg, half);
    double vmin = 1e300;
    for (double x : r.v_grid.values) vmin = std::min(vmin, x);
    const double bound = half.p1() * std::pow(4 * pi, (cfg.p - 1.0) / (cfg.p + 1.0));
    double lo = r.energy, hi = r.energy;
    for (std::uint64_t s = 2; s <= 10; ++s) {
      SolverConfig c2 = cfg;
      c2.seed = s;
      const SolutionRecord q = minimize_subcritical(*K, c2, half);
      if (!q.converged) return Outcome{false, q.el_residual, 1e-6, "seed " + std::to_string(s) + " did not converge"};
      lo = std::min(lo, q.energy);
      hi = std::max(hi, q.energy);
    }
    const double spread = (hi - lo) / lo;
    const bool ok = r.converged && vmin > 0.0 && r.lambda <= bound + 1e-6 && r.el_residual < 1e-6 && spread < 1e-5;
    return Outcome{ok, spread, 1e-5, "el " + sci(r.el_residual) + ", lambda - bound " +
                                         sci(r.lambda - bound)};
  });

  criterion(9, "second-variation", [] {
    std::mt19937_64 rng(99);
    const double c = 1.0 - half.lambda(1) / half.lambda(2);
    double worst = 1e300;
    for (int s = 0; s < 100; ++s) {
      const SpectralField w = random_field(10, rng, 2);
      // Q is an average, so the energy is divided by the volume too
      worst = std::min(worst, quadratic_form_Q(w, half) - c * hsigma_energy(w, half) / half.volume());
    }
    SpectralField w(3);
    w.at(2, 1) = 1.0;
    w.at(3, -2) = 0.5;
    w.at(2, 0) = 0.7;
    auto gap = [&](double eps) {
      SpectralField x = w;
      for (auto& v : x.coeffs) v *= eps;
      return std::abs(expansion_check_E(x, half).gap);
    };
    const double ratio = gap(0.01) / gap(0.02);
    const bool ok = worst >= -1e-12 && ratio < 0.55 * 0.25;
    return Outcome{ok, ratio, 0.55 * 0.25, "coercivity margin " + sci(worst)};
  });

  criterion(10, "sharp-sobolev", [] {
    std::mt19937_64 rng(10);
    const GridRef g = default_grid(8);
    double worst = 1e300;
    for (int s = 0; s < 100; ++s) {
      // perturbations of the constant down to 1e-4 probe the neighbourhood of the extremal
      SpectralField v = random_field(8, rng);
      for (auto& x : v.coeffs) x *= std::pow(10.0, -(s % 5));
      if (s % 5 != 0) v.at(0, 0) += 1.0;
      worst = std::min(worst, sobolev_deficit(v, half, g));
    }
    SpectralField one(8);
    one.at(0, 0) = 2.0;
    const double d_const = std::abs(sobolev_deficit(one, half, g));
    const GridRef gb = default_grid(64);
    const SpectralField bub = sht_forward(bubble_field(Bubble(random_point(rng), 1.5, half), gb), 64);
    const double d_bubble = std::abs(sobolev_deficit(bub, half, gb));
    const bool ok = worst >= -1e-9 && d_const < 1e-6 && d_bubble < 1e-6;
    return Outcome{ok, std::max(d_const, d_bubble), 1e-6, "min deficit " + sci(worst)};
  });

  criterion(11, "degree-index-formula", [] {
    const auto tilt = tilt_function(2, 0.1);
    const double moment = std::max(norm(g_map(*constant_function(2, 1.0), {0.0, 0.0, 1.0, 0.0}, 3.0)),
                                   norm(g_map(*tilt, normalized(Vec4{0.3, 0.2, 0.5, 0.0}), 1.0) -
                                        Vec4{0.0, 0.0, 0.1 / 3, 0.0}));
    if (!(moment < 1e-12)) return Outcome{false, moment, 1e-12, "moment identity"};
    std::mt19937_64 rng(11);
    double ibp = 0.0;
    for (int s = 0; s < 5; ++s) {
      const Vec4 P = random_point(rng);
      const double t = 1.0 + 4.0 * s;
      ibp = std::max(ibp, norm(a_map(*tilt, P, t, half) - g_map(*tilt, P, t)));
    }
    if (!(ibp < 1e-8)) return Outcome{false, ibp, 1e-8, "integration by parts"};
    for (double s : {0.85, 0.9, 0.95}) {
      const DegreeResult d = brouwer_degree(*tilt, s);
      const DegreeResult o = degree_by_preimages(*tilt, s);
      if (!d.conclusive || !o.conclusive || d.degree != o.degree || d.degree != 0)
        return Outcome{false, double(d.degree), 0.0, "tilt degree at s = " + std::to_string(s)};
    }
    const std::vector<std::pair<std::string, ModelConfig>> models = {
        {"tilt", tilt_model(2, 0.1, 1.5)},
        {"quadratic+", quadratic_model(2, 1.0, {0.1, 0.2, 0.4, 0.0}, 1.5)},
        {"quadratic-", quadratic_model(2, 1.0, {0.1, 0.3, 0.4, 0.0}, 1.5)},
    };
    std::string detail;
    for (const auto& [name, mc] : models) {
      const IndexCount ic = index_count(mc.models, 2, half);
      const DegreeResult d = brouwer_degree(*mc.K, 0.9);
      detail += name + " " + std::to_string(ic.predicted_degree) + "/" + std::to_string(d.degree) + " ";
      if (!d.conclusive || d.degree != ic.predicted_degree) return Outcome{false, double(d.degree), 0.0, detail};
    }
    return Outcome{true, 0.0, 0.0, detail + "(predicted/numeric)"};
  });

  criterion(12, "aubin-inequality", [] {
    const AubinReport a = aubin_explore(3.0, 0.1, 50);
    const AubinReport b = aubin_explore(3.0, 0.1, 50);
    const bool deterministic = a.sample_values == b.sample_values && a.empirical_constant == b.empirical_constant;
    const AubinReport s = aubin_sobolev_explore(3.9, 0.9, 50);
    const bool ok = !a.violation && deterministic && !s.violation && a.skipped < a.samples;
    return Outcome{ok, a.worst_gap, -1e-9,
                   "C=" + sci(a.empirical_constant) + (deterministic ? ", deterministic" : ", not deterministic")};
  });

  return failures == 0 ? 0 : 1;
}
