#include "fracsphere/fracop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fracsphere/errors.hpp"
#include "fracsphere/harmonics.hpp"
#include "fracsphere/simd.hpp"
#include "fracsphere/special.hpp"

namespace fracsphere {

FracOperatorSpec::FracOperatorSpec(int dim, double order) : n(dim), sigma(order) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("operator spec: sigma must lie in (0,1)");
  if (n < 1) throw DomainError("operator spec: dimension must be positive");
  if (!(n - 2.0 * sigma > 0.0)) throw DomainError("operator spec: requires n > 2 sigma");
}

double FracOperatorSpec::p1() const { return eigenvalue(0, n, sigma); }

double FracOperatorSpec::singular_constant() const {
  const double pi = std::numbers::pi;
  return std::exp(2.0 * sigma * std::log(2.0) + std::lgamma(0.5 * (n + 2.0 * sigma)) - 0.5 * n * std::log(pi) -
                  std::lgamma(1.0 - sigma)) *
         sigma;
}

double FracOperatorSpec::riesz_constant() const {
  const double pi = std::numbers::pi;
  return std::exp(std::lgamma(0.5 * (n - 2.0 * sigma)) - 2.0 * sigma * std::log(2.0) - 0.5 * n * std::log(pi) -
                  std::lgamma(sigma));
}

double FracOperatorSpec::critical_exponent() const { return 2.0 * n / (n - 2.0 * sigma); }

double FracOperatorSpec::sobolev_power() const { return (n + 2.0 * sigma) / (n - 2.0 * sigma); }

double FracOperatorSpec::lambda(int k) const { return eigenvalue(k, n, sigma); }

double FracOperatorSpec::volume() const { return sphere_volume(n); }

SpectralField apply_ps_spectral(const SpectralField& v, const FracOperatorSpec& spec) {
  if (spec.n != 2) throw DomainError("apply_ps_spectral: spectral path exists for n = 2 only");
  SpectralField out = v;
  for (int k = 0; k <= v.lmax; ++k) {
    const double lam = spec.lambda(k);
    for (int m = -k; m <= k; ++m) out.at(k, m) *= lam;
  }
  return out;
}

double hsigma_energy(const SpectralField& v, const FracOperatorSpec& spec) {
  double e = 0.0;
  for (int k = 0; k <= v.lmax; ++k) {
    double s = 0.0;
    for (int m = -k; m <= k; ++m) s += v.at(k, m) * v.at(k, m);
    e += spec.lambda(k) * s;
  }
  return e;
}

namespace {

double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// 1 near the target, 0 beyond d2, C-infinity in between
double cutoff(double d, double d1, double d2) { return 1.0 - smooth_step((d - d1) / (d2 - d1)); }

enum class Kernel { singular, riesz };

struct KernelSetup {
  double exponent;     // kernel is d^{-exponent}
  double near_weight;  // radial Gauss-Jacobi exponent on the inner panel
  double d1, d2, r1, r2;
  int lmax;
  SpectralField coeffs;
};

KernelSetup setup(const GridField& f, const FracOperatorSpec& spec, const KernelSumOptions& opt, Kernel kind,
                  const char* who) {
  if (spec.n != 2 || f.grid->dim() != 2) throw DomainError(std::string(who) + ": implemented for n = 2 grids");
  if (!(opt.inner_radius > 0.0) || !(opt.outer_radius > opt.inner_radius) || opt.radial_nodes < 2) {
    throw DomainError(std::string(who) + ": invalid kernel-sum options");
  }
  for (double x : f.values)
    if (!std::isfinite(x)) throw DomainError(std::string(who) + ": non-finite field value");
  KernelSetup s;
  const double h = f.grid->polar_spacing();
  s.d1 = opt.inner_radius * h;
  s.d2 = opt.outer_radius * h;
  if (s.d2 >= 1.5) {
    throw ResolutionError(std::string(who) + ": grid too coarse for the near-diagonal cap (" +
                          std::to_string(f.grid->polar()) + " rings)");
  }
  s.r1 = 2.0 * std::asin(0.5 * s.d1);
  s.r2 = 2.0 * std::asin(0.5 * s.d2);
  if (kind == Kernel::singular) {
    s.exponent = spec.n + 2.0 * spec.sigma;
    s.near_weight = 1.0 - 2.0 * spec.sigma;
  } else {
    s.exponent = spec.n - 2.0 * spec.sigma;
    s.near_weight = 2.0 * spec.sigma - 1.0;
  }
  const SpectralField full = sht_forward(f, f.grid->max_band_limit());
  s.lmax = std::max(1, full.effective_degree(1e-13));
  if (s.lmax > 64) {
    throw ResolutionError(std::string(who) + ": field is not band-limited (effective degree " +
                          std::to_string(s.lmax) + "), near-field synthesis refused");
  }
  s.coeffs = full.resized(s.lmax);
  return s;
}

// Near-field functional for targets on polar ring j at azimuth 0: a coefficient
// vector g with near(xi) = g . c for the field's harmonic coefficients c.
std::vector<double> near_vector(const KernelSetup& s, const SphereGrid& grid, int ring, Kernel kind,
                                const KernelSumOptions& opt) {
  const double z0 = grid.ring_z()[ring];
  const double rho0 = std::sqrt((1.0 - z0) * (1.0 + z0));
  const Vec4 xi{rho0, 0.0, z0, 0.0};
  const Vec4 e1{z0, 0.0, -rho0, 0.0};
  const Vec4 e2{0.0, 1.0, 0.0, 0.0};
  const std::size_t nc = SpectralField::count(s.lmax);
  const int n_alpha = 2 * s.lmax + 4;

  HarmonicEvaluator ev(s.lmax);
  std::vector<double> center, basis, avg(nc), out(nc, 0.0);
  ev.basis(xi, center);

  auto accumulate = [&](double r, double weight) {
    std::fill(avg.begin(), avg.end(), 0.0);
    const double cr = std::cos(r), sr = std::sin(r);
    for (int b = 0; b < n_alpha; ++b) {
      const double al = 2.0 * std::numbers::pi * b / n_alpha;
      const Vec4 zeta = cr * xi + (sr * std::cos(al)) * e1 + (sr * std::sin(al)) * e2;
      ev.basis(zeta, basis);
      simd::axpy(1.0 / n_alpha, basis.data(), avg.data(), nc);
    }
    if (kind == Kernel::singular) {
      for (std::size_t i = 0; i < nc; ++i) out[i] += weight * (center[i] - avg[i]);
    } else {
      simd::axpy(weight, avg.data(), out.data(), nc);
    }
  };

  // inner panel [0, r1]: chi = 1, weight r^beta carried by the Gauss-Jacobi rule
  const QuadratureRule gj = gauss_jacobi(opt.radial_nodes, 0.0, s.near_weight);
  const double half1 = 0.5 * s.r1;
  const double scale1 = std::pow(half1, s.near_weight + 1.0);
  for (std::size_t a = 0; a < gj.nodes.size(); ++a) {
    const double r = half1 * (gj.nodes[a] + 1.0);
    const double d = 2.0 * std::sin(0.5 * r);
    const double g = 2.0 * std::numbers::pi * std::sin(r) * std::pow(d, -s.exponent) / std::pow(r, s.near_weight);
    accumulate(r, scale1 * gj.weights[a] * g);
  }
  // transition panel [r1, r2]
  const QuadratureRule gl = gauss_legendre(opt.radial_nodes);
  const double half2 = 0.5 * (s.r2 - s.r1);
  for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
    const double r = s.r1 + half2 * (gl.nodes[a] + 1.0);
    const double d = 2.0 * std::sin(0.5 * r);
    const double g = 2.0 * std::numbers::pi * std::sin(r) * std::pow(d, -s.exponent) * cutoff(d, s.d1, s.d2);
    accumulate(r, half2 * gl.weights[a] * g);
  }
  return out;
}

// Far-field weights for targets on ring j at azimuth 0: row j' holds
// W_j' (1 - chi(d)) d^{-exponent} for the node at relative azimuth index m.
std::vector<double> far_table(const KernelSetup& s, const SphereGrid& grid, int ring) {
  const int polar = grid.polar();
  const int azim = grid.azimuthal();
  const double z0 = grid.ring_z()[ring];
  const double rho0 = std::sqrt((1.0 - z0) * (1.0 + z0));
  std::vector<double> cphi(azim);
  for (int m = 0; m < azim; ++m) cphi[m] = std::cos(2.0 * std::numbers::pi * m / azim);
  std::vector<double> table(static_cast<std::size_t>(polar) * azim, 0.0);
  for (int j = 0; j < polar; ++j) {
    const double z = grid.ring_z()[j];
    const double rho = std::sqrt((1.0 - z) * (1.0 + z));
    const double w = grid.ring_weight()[j];
    double* row = table.data() + static_cast<std::size_t>(j) * azim;
    for (int m = 0; m < azim; ++m) {
      const double d2 = std::max(0.0, 2.0 - 2.0 * (z0 * z + rho0 * rho * cphi[m]));
      const double d = std::sqrt(d2);
      if (d <= s.d1) continue;
      const double chi = cutoff(d, s.d1, s.d2);
      row[m] = w * (1.0 - chi) * std::pow(d2, -0.5 * s.exponent);
    }
  }
  return table;
}

// coefficients of v o R where R rotates by angle phi0 about the polar axis
void rotate_coeffs(const SpectralField& c, double phi0, std::vector<double>& out) {
  out.assign(c.coeffs.size(), 0.0);
  for (int m = 0; m <= c.lmax; ++m) {
    const double cm = std::cos(m * phi0), sm = std::sin(m * phi0);
    for (int k = m; k <= c.lmax; ++k) {
      if (m == 0) {
        out[SpectralField::index(k, 0)] = c.at(k, 0);
        continue;
      }
      const double a = c.at(k, m), b = c.at(k, -m);
      out[SpectralField::index(k, m)] = a * cm + b * sm;
      out[SpectralField::index(k, -m)] = b * cm - a * sm;
    }
  }
}

// Raw integral (without the operator constant) at the requested node indices.
std::vector<double> kernel_integral(const GridField& f, const KernelSetup& s, Kernel kind,
                                    const KernelSumOptions& opt, const std::vector<std::size_t>& targets) {
  const SphereGrid& grid = *f.grid;
  const int azim = grid.azimuthal();
  const int polar = grid.polar();
  std::vector<double> result(targets.size(), 0.0);

  // group targets by ring so each ring's tables are built once
  std::vector<std::vector<std::size_t>> by_ring(polar);
  for (std::size_t t = 0; t < targets.size(); ++t) by_ring[targets[t] / azim].push_back(t);

  std::vector<double> rotated;
  for (int j0 = 0; j0 < polar; ++j0) {
    if (by_ring[j0].empty()) continue;
    const std::vector<double> table = far_table(s, grid, j0);
    const std::vector<double> near = near_vector(s, grid, j0, kind, opt);
    std::vector<double> row_sum(polar);
    for (int j = 0; j < polar; ++j) row_sum[j] = simd::sum(table.data() + static_cast<std::size_t>(j) * azim, azim);
    const double total = simd::sum(row_sum.data(), row_sum.size());

    for (std::size_t t : by_ring[j0]) {
      const std::size_t node = targets[t];
      const int k0 = static_cast<int>(node % azim);
      // cyclic correlation of each ring with the table row
      double corr = 0.0;
      for (int j = 0; j < polar; ++j) {
        const double* row = table.data() + static_cast<std::size_t>(j) * azim;
        const double* vals = f.values.data() + static_cast<std::size_t>(j) * azim;
        corr += simd::dot(row, vals + k0, static_cast<std::size_t>(azim - k0));
        if (k0 > 0) corr += simd::dot(row + (azim - k0), vals, static_cast<std::size_t>(k0));
      }
      const double far = kind == Kernel::singular ? f.values[node] * total - corr : corr;
      rotate_coeffs(s.coeffs, 2.0 * std::numbers::pi * k0 / azim, rotated);
      const double nearv = simd::dot(near.data(), rotated.data(), near.size());
      result[t] = far + nearv;
    }
  }
  return result;
}

std::vector<std::size_t> probe_nodes(const SphereGrid& grid, int count) {
  std::vector<std::size_t> nodes;
  const int polar = grid.polar();
  const int azim = grid.azimuthal();
  for (int i = 0; i < count; ++i) {
    const int j = std::min(polar - 1, static_cast<int>((i + 0.5) * polar / count));
    const int k = (7 * i) % azim;
    nodes.push_back(static_cast<std::size_t>(j) * azim + k);
  }
  return nodes;
}

// Applies the scheme to Y_1^0 at a few nodes and compares with the exact action.
void probe(const GridField& f, const FracOperatorSpec& spec, const KernelSumOptions& opt, Kernel kind,
           const char* who) {
  if (opt.probe_targets <= 0) return;
  const GridField y = harmonic_field(f.grid, 1, 0);
  const KernelSetup s = setup(y, spec, opt, kind, who);
  const std::vector<std::size_t> nodes = probe_nodes(*f.grid, opt.probe_targets);
  const std::vector<double> raw = kernel_integral(y, s, kind, opt, nodes);
  const double peak = std::sqrt(3.0 / (4.0 * std::numbers::pi));
  double err = 0.0;
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    const double yv = y.values[nodes[t]];
    double got, want;
    if (kind == Kernel::singular) {
      got = spec.p1() * yv + spec.singular_constant() * raw[t];
      want = spec.lambda(1) * yv;
      err = std::max(err, std::abs(got - want) / (spec.lambda(1) * peak));
    } else {
      got = spec.riesz_constant() * raw[t];
      want = yv / spec.lambda(1);
      err = std::max(err, std::abs(got - want) / (peak / spec.lambda(1)));
    }
  }
  if (err > opt.probe_tolerance) {
    throw ResolutionError(std::string(who) + ": self-consistency probe on Y_1 failed, relative error " +
                          std::to_string(err) + " > " + std::to_string(opt.probe_tolerance));
  }
}

std::vector<std::size_t> all_nodes(const SphereGrid& grid) {
  std::vector<std::size_t> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

}  // namespace

GridField apply_ps_singular(const GridField& v, const FracOperatorSpec& spec, const KernelSumOptions& opt) {
  const KernelSetup s = setup(v, spec, opt, Kernel::singular, "apply_ps_singular");
  probe(v, spec, opt, Kernel::singular, "apply_ps_singular");
  const std::vector<double> raw = kernel_integral(v, s, Kernel::singular, opt, all_nodes(*v.grid));
  GridField out(v.grid);
  const double p1 = spec.p1();
  const double c = spec.singular_constant();
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = p1 * v.values[i] + c * raw[i];
  return out;
}

GridField riesz_potential(const GridField& f, const FracOperatorSpec& spec, const KernelSumOptions& opt) {
  const KernelSetup s = setup(f, spec, opt, Kernel::riesz, "riesz_potential");
  probe(f, spec, opt, Kernel::riesz, "riesz_potential");
  const std::vector<double> raw = kernel_integral(f, s, Kernel::riesz, opt, all_nodes(*f.grid));
  GridField out(f.grid);
  const double c = spec.riesz_constant();
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = c * raw[i];
  return out;
}

namespace {

double power_average(const GridField& v, const GridField& K, double q) {
  double s = 0.0;
  const auto& w = v.grid->weights();
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * K.values[i] * std::pow(std::abs(v.values[i]), q);
  return s / sphere_volume(v.grid->dim());
}

}  // namespace

double functional_EK(const SpectralField& v, const GridField& K, const FracOperatorSpec& spec) {
  if (spec.n != 2 || K.grid->dim() != 2) throw DomainError("functional_EK: n = 2 only");
  const double omega = spec.volume();
  const double num = hsigma_energy(v, spec) / omega;
  const GridField vg = sht_inverse(v, K.grid);
  const double den = power_average(vg, K, spec.critical_exponent());
  if (!(den > 0.0)) throw DomainError("functional_EK: non-positive denominator, E_K undefined");
  return num / std::pow(den, (spec.n - 2.0 * spec.sigma) / spec.n);
}

double functional_EK(const GridField& v, const GridField& K, const FracOperatorSpec& spec) {
  return functional_EK(sht_forward(v, v.grid->max_band_limit()), K, spec);
}

double sobolev_deficit(const SpectralField& v, const FracOperatorSpec& spec, const GridRef& grid) {
  const double omega = spec.volume();
  const double avg_energy = hsigma_energy(v, spec) / omega;
  const GridField vg = sht_inverse(v, grid);
  const double avg_power = power_average(vg, GridField(grid, 1.0), spec.critical_exponent());
  return avg_energy / spec.p1() - std::pow(avg_power, (spec.n - 2.0 * spec.sigma) / spec.n);
}

GridRef default_grid(int lmax, double power) {
  const double deg = std::max(1.0, power) * std::max(lmax, 1);
  const int polar = std::max(lmax + 1, static_cast<int>(std::ceil(0.5 * (deg + 1.0))) + 2);
  return SphereGrid::build(2, {polar, std::max(2 * polar, 2 * lmax + 2)});
}

}  // namespace fracsphere
