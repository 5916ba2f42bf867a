#include "fracsphere/special.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "fracsphere/errors.hpp"

namespace fracsphere {

double gamma_ratio(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("gamma_ratio: arguments must be positive");
  // tgamma overflows past 171; below that the direct quotient is the more accurate one
  if (a < 150.0 && b < 150.0) return std::tgamma(a) / std::tgamma(b);
  return std::exp(std::lgamma(a) - std::lgamma(b));
}

double eigenvalue(int k, int n, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("eigenvalue: sigma must lie in (0,1)");
  if (k < 0) throw DomainError("eigenvalue: negative degree");
  if (n < 1) throw DomainError("eigenvalue: dimension must be positive");
  const double h = 0.5 * n;
  if (h - sigma <= 0.0) throw DomainError("eigenvalue: requires n > 2 sigma");
  return gamma_ratio(k + h + sigma, k + h - sigma);
}

double multiplicity(int k, int n) {
  if (k < 0 || n < 1) throw DomainError("multiplicity: invalid arguments");
  if (n == 1) return k == 0 ? 1.0 : 2.0;
  // (2k+n-1)(k+n-2)! / ((n-1)! k!)
  return (2.0 * k + n - 1.0) * std::exp(std::lgamma(k + n - 1.0) - std::lgamma(n) - std::lgamma(k + 1.0));
}

double sphere_volume(int n) {
  if (n < 1) throw DomainError("sphere_volume: n must be at least 1");
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

QuadratureRule gauss_legendre(int count) {
  if (count < 1) throw DomainError("gauss_legendre: count must be positive");
  QuadratureRule rule;
  rule.nodes.assign(count, 0.0);
  rule.weights.assign(count, 0.0);
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= count; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
      }
      dp = count * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // one more evaluation at the converged node for the weight
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= count; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
    }
    dp = count * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[count - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[count - 1 - i] = w;
  }
  if (count % 2 == 1) rule.nodes[count / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_jacobi(int count, double alpha, double beta) {
  if (count < 1) throw DomainError("gauss_jacobi: count must be positive");
  if (!(alpha > -1.0) || !(beta > -1.0)) throw DomainError("gauss_jacobi: exponents must exceed -1");
  // Golub-Welsch on the symmetric Jacobi matrix of the monic recurrence
  Eigen::VectorXd diag(count), sub(count > 1 ? count - 1 : 1);
  const double ab = alpha + beta;
  for (int k = 0; k < count; ++k) {
    if (k == 0) {
      diag(0) = (beta - alpha) / (ab + 2.0);
    } else {
      const double s = 2.0 * k + ab;
      diag(k) = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k < count; ++k) {
    const double s = 2.0 * k + ab;
    const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
    const double den = s * s * (s + 1.0) * (s - 1.0);
    sub(k - 1) = std::sqrt(num / den);
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                              std::lgamma(ab + 2.0));
  QuadratureRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  if (count == 1) {
    rule.nodes[0] = diag(0);
    rule.weights[0] = mu0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(count - 1), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw ConvergenceError("gauss_jacobi: eigen solve failed", 0.0, 0);
  for (int i = 0; i < count; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

QuadratureRule gauss_chebyshev_u(int count) {
  if (count < 1) throw DomainError("gauss_chebyshev_u: count must be positive");
  QuadratureRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  for (int i = 0; i < count; ++i) {
    const double a = std::numbers::pi * (i + 1) / (count + 1);
    const double s = std::sin(a);
    rule.nodes[i] = -std::cos(a);
    rule.weights[i] = std::numbers::pi / (count + 1) * s * s;
  }
  return rule;
}

}  // namespace fracsphere
