#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fracsphere/conformal.hpp"
#include "fracsphere/fracop.hpp"
#include "fracsphere/sphere_function.hpp"

namespace fracsphere {

enum class Symmetry { none, antipodal };

struct SolverConfig {
  double p = 2.5;  // 1 < p < sobolev power
  int lmax = 16;
  double initial_step = 1.0;
  double backtrack = 0.5;
  int max_iterations = 3000;
  double tolerance = 1e-9;  // on the Euler-Lagrange residual
  Symmetry symmetry = Symmetry::none;
  std::uint64_t seed = 1;
  double init_amplitude = 0.2;
  double concentration_threshold = 20.0;

  void validate(const FracOperatorSpec& spec) const;
};

struct SolutionRecord {
  SpectralField v;
  GridField v_grid;
  double p = 0.0;
  double energy = 0.0;      // int v P v
  double constraint = 0.0;  // int K |v|^{p+1}
  double lambda = 0.0;
  bool has_Lambda = false;
  Vec4 Lambda{0.0, 0.0, 0.0, 0.0};
  double el_residual = 0.0;  // || P v - lambda K |v|^{p-1} v ||_{L^2}
  double kw_residual = 0.0;  // scaled, see kw_residual
  double sup_over_mean = 0.0;
  int iterations = 0;
  bool converged = false;
  bool abs_replaced = false;
  std::vector<double> objective;  // per accepted iterate
};

// Minimizes int v P v over { int K |v|^{p+1} = 1 } (n = 2, spectral coefficients up
// to cfg.lmax); preconditioned by P^{-1}, Armijo backtracking, renormalized after
// every step.
SolutionRecord minimize_subcritical(const SphereFunction& K, const SolverConfig& cfg,
                                    const FracOperatorSpec& spec = {});
// Same, warm-started from start.
SolutionRecord minimize_subcritical(const SphereFunction& K, const SolverConfig& cfg, const SpectralField& start,
                                    const FracOperatorSpec& spec = {});

// Stages are warm-started from the previous one; the chain stops at the first
// stage that does not converge (that record is included).
std::vector<SolutionRecord> continuation_to_critical(const SphereFunction& K, const std::vector<double>& schedule,
                                                     const SolverConfig& cfg, const FracOperatorSpec& spec = {});

struct Multipliers {
  double lambda = 0.0;
  Vec4 Lambda{0.0, 0.0, 0.0, 0.0};
  std::array<double, 16> gram{};  // row-major (n+1) x (n+1) block
};

// Gram_ij = int <grad x_i, grad x_j> v^crit, rhs_i = lambda int <grad K, grad x_i> v^crit,
// lambda = avg(v P v) / avg(K v^crit).
Multipliers multiplier_solve(const GridField& v, const SphereFunction& K, const FracOperatorSpec& spec);

struct KWResult {
  Vec4 integrals{0.0, 0.0, 0.0, 0.0};  // int <grad K, grad x_i> |v|^crit
  double norm = 0.0;
  // norm / (max |grad K| * int |v|^crit), 0 when grad K vanishes
  double scaled = 0.0;
};

KWResult kw_residual(const GridField& v, const SphereFunction& K, const FracOperatorSpec& spec);

// avg(w P w - lambda_1 w^2); w must have no degree 0 or 1 content.
double quadratic_form_Q(const SpectralField& wtilde, const FracOperatorSpec& spec);

struct ExpansionCheck {
  double lhs = 0.0;  // E_1(1 + w~ + mu + eta.x)
  double rhs = 0.0;  // P(1) + Q(w~)
  double gap = 0.0;
  double mu = 0.0;
  Vec4 eta{0.0, 0.0, 0.0, 0.0};
};

ExpansionCheck expansion_check_E(const SpectralField& wtilde, const FracOperatorSpec& spec);

struct AubinConfig {
  int lmax = 6;
  int iterations = 60;
  std::uint64_t seed = 7;
  double amplitude = 0.4;
};

struct AubinReport {
  double p = 0.0;
  double parameter = 0.0;  // epsilon for the Aubin explorer, a for the Aubin-Sobolev one
  int samples = 0;
  int skipped = 0;
  // Aubin: min over found points of a avg(vPv) + C avg(v^2) - P(1) with the reported C.
  // Aubin-Sobolev: min over found points of a avg(vPv) + (1-a) P(1) avg(v^2) - P(1).
  double worst_gap = 0.0;
  double empirical_constant = 0.0;  // C_eps, or the a used
  bool violation = false;
  std::uint64_t seed = 0;
  std::vector<double> sample_values;  // per converged start
};

// Maximizes (P(1) - a avg(vPv)) / avg(v^2), a = 2^{2/p - 1}(1 + eps), over
// M_0^p = { avg|v|^p = 1, avg(x |v|^p) = 0 } from seeded random starts;
// C_eps = max(0, largest value found).
AubinReport aubin_explore(double p, double eps, int samples, const AubinConfig& cfg = {},
                          const FracOperatorSpec& spec = {});
// Minimizes a avg(vPv) + (1 - a) P(1) avg(v^2) - P(1) over M_0^p.
AubinReport aubin_sobolev_explore(double p, double a, int samples, const AubinConfig& cfg = {},
                                  const FracOperatorSpec& spec = {});

}  // namespace fracsphere
