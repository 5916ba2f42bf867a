#include "fracsphere/sphere_function.hpp"

#include <cmath>
#include <sstream>

#include "fracsphere/errors.hpp"
#include "fracsphere/harmonics.hpp"

namespace fracsphere {

GridField sample(const SphereFunction& f, const GridRef& grid) {
  if (f.dim() != grid->dim()) throw DomainError("sample: dimension mismatch");
  GridField out(grid);
  const auto& nodes = grid->nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) out.values[i] = f.value(nodes[i]);
  return out;
}

namespace {

class SpectralFunction final : public SphereFunction {
 public:
  explicit SpectralFunction(SpectralField c) : c_(std::move(c)) {}
  int dim() const override { return 2; }
  double value(const Vec4& x) const override { return evaluator().value(c_, x); }
  Vec4 gradient(const Vec4& x) const override {
    Vec4 g;
    evaluator().value_gradient(c_, x, g);
    return g;
  }
  std::string describe() const override { return "spectral(lmax=" + std::to_string(c_.lmax) + ")"; }

 private:
  HarmonicEvaluator& evaluator() const {
    thread_local std::unique_ptr<HarmonicEvaluator> ev;
    if (!ev || ev->lmax() < c_.lmax) ev = std::make_unique<HarmonicEvaluator>(c_.lmax);
    return *ev;
  }
  SpectralField c_;
};

class QuadraticFunction final : public SphereFunction {
 public:
  // offset + sum_i lin_i x_i + sum_i quad_i x_i^2
  QuadraticFunction(int n, double offset, Vec4 lin, Vec4 quad, std::string name)
      : n_(n), offset_(offset), lin_(lin), quad_(quad), name_(std::move(name)) {}
  int dim() const override { return n_; }
  double value(const Vec4& x) const override {
    double v = offset_;
    for (int i = 0; i <= n_; ++i) v += lin_[i] * x[i] + quad_[i] * x[i] * x[i];
    return v;
  }
  Vec4 gradient(const Vec4& x) const override {
    Vec4 g{0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i <= n_; ++i) g[i] = lin_[i] + 2.0 * quad_[i] * x[i];
    return tangential(x, g);
  }
  std::string describe() const override { return name_; }

 private:
  int n_;
  double offset_;
  Vec4 lin_, quad_;
  std::string name_;
};

class RotatedFunction final : public SphereFunction {
 public:
  RotatedFunction(SphereFunctionRef f, const std::array<double, 16>& R) : f_(std::move(f)), R_(R) {}
  int dim() const override { return f_->dim(); }
  double value(const Vec4& x) const override { return f_->value(apply(x)); }
  Vec4 gradient(const Vec4& x) const override {
    // grad (f o R)(x) = R^T grad f(R x)
    const Vec4 g = f_->gradient(apply(x));
    Vec4 out{0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out[i] += R_[4 * j + i] * g[j];
    return out;
  }
  std::string describe() const override { return "rotated(" + f_->describe() + ")"; }

 private:
  Vec4 apply(const Vec4& x) const {
    Vec4 y{0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) y[i] += R_[4 * i + j] * x[j];
    return y;
  }
  SphereFunctionRef f_;
  std::array<double, 16> R_;
};

class LambdaFunction final : public SphereFunction {
 public:
  LambdaFunction(int n, std::function<double(const Vec4&)> v, std::function<Vec4(const Vec4&)> g, std::string name)
      : n_(n), v_(std::move(v)), g_(std::move(g)), name_(std::move(name)) {}
  int dim() const override { return n_; }
  double value(const Vec4& x) const override { return v_(x); }
  Vec4 gradient(const Vec4& x) const override { return tangential(x, g_(x)); }
  std::string describe() const override { return name_; }

 private:
  int n_;
  std::function<double(const Vec4&)> v_;
  std::function<Vec4(const Vec4&)> g_;
  std::string name_;
};

void check_dim(int n) {
  if (n != 2 && n != 3) throw DomainError("sphere function: dimension must be 2 or 3");
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

SphereFunctionRef spectral_function(const SpectralField& c) { return std::make_shared<SpectralFunction>(c); }

SphereFunctionRef constant_function(int n, double c) {
  check_dim(n);
  return std::make_shared<QuadraticFunction>(n, c, Vec4{}, Vec4{}, "const(" + num(c) + ")");
}

SphereFunctionRef tilt_function(int n, double eps) {
  check_dim(n);
  Vec4 lin{};
  lin[n] = eps;
  return std::make_shared<QuadraticFunction>(n, 1.0, lin, Vec4{}, "tilt(" + num(eps) + ")");
}

SphereFunctionRef even_band_function(int n, double eps) {
  check_dim(n);
  Vec4 quad{};
  quad[n] = eps;
  return std::make_shared<QuadraticFunction>(n, 1.0, Vec4{}, quad, "even-band(" + num(eps) + ")");
}

SphereFunctionRef quadratic_function(int n, double offset, double eps, const Vec4& c) {
  check_dim(n);
  Vec4 quad{};
  for (int i = 0; i <= n; ++i) quad[i] = eps * c[i];
  return std::make_shared<QuadraticFunction>(n, offset, Vec4{}, quad, "quadratic");
}

SphereFunctionRef rotated_function(SphereFunctionRef f, const std::array<double, 16>& R) {
  return std::make_shared<RotatedFunction>(std::move(f), R);
}

SphereFunctionRef lambda_function(int n, std::function<double(const Vec4&)> value,
                                  std::function<Vec4(const Vec4&)> gradient, std::string name) {
  check_dim(n);
  return std::make_shared<LambdaFunction>(n, std::move(value), std::move(gradient), std::move(name));
}

}  // namespace fracsphere
