#include "fracsphere/harmonics.hpp"

#include <cmath>
#include <numbers>

#include "fracsphere/errors.hpp"
#include "fracsphere/simd.hpp"

namespace fracsphere {

namespace {

inline std::size_t tri(int k, int m) { return static_cast<std::size_t>(k * (k + 1) / 2 + m); }

struct RecurrenceTable {
  int lmax = -1;
  std::vector<double> a, b, diag;  // a_km, b_km (triangular), diag_m = sqrt((2m+1)/(2m))
};

const RecurrenceTable& recurrence(int lmax) {
  thread_local RecurrenceTable t;
  if (t.lmax >= lmax) return t;
  t.lmax = lmax;
  t.a.assign(tri(lmax, lmax) + 1, 0.0);
  t.b.assign(t.a.size(), 0.0);
  t.diag.assign(lmax + 1, 1.0);
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) t.diag[m] = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    for (int k = m + 2; k <= lmax; ++k) {
      const double kk = static_cast<double>(k) * k;
      const double mm = static_cast<double>(m) * m;
      const double km1 = static_cast<double>(k - 1) * (k - 1);
      t.a[tri(k, m)] = std::sqrt((4.0 * kk - 1.0) / (kk - mm));
      t.b[tri(k, m)] = std::sqrt((km1 - mm) / (4.0 * km1 - 1.0));
    }
  }
  return t;
}

// Normalized associated Legendre functions divided by rho^m, and optionally their
// z-derivatives. q has triangular layout of size (L+1)(L+2)/2.
void legendre_q(int lmax, double z, double* q, double* dq) {
  const RecurrenceTable& rt = recurrence(lmax);
  q[0] = 0.5 / std::sqrt(std::numbers::pi);
  if (dq) dq[0] = 0.0;
  double qmm = q[0];
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) {
      qmm *= rt.diag[m];
      q[tri(m, m)] = qmm;
      if (dq) dq[tri(m, m)] = 0.0;
    }
    if (m + 1 <= lmax) {
      const double c = std::sqrt(2.0 * m + 3.0);
      q[tri(m + 1, m)] = c * z * qmm;
      if (dq) dq[tri(m + 1, m)] = c * qmm;
    }
    for (int k = m + 2; k <= lmax; ++k) {
      const double a = rt.a[tri(k, m)];
      const double b = rt.b[tri(k, m)];
      const double q1 = q[tri(k - 1, m)];
      const double q2 = q[tri(k - 2, m)];
      q[tri(k, m)] = a * (z * q1 - b * q2);
      if (dq) dq[tri(k, m)] = a * (q1 + z * dq[tri(k - 1, m)] - b * dq[tri(k - 2, m)]);
    }
  }
}

}  // namespace

HarmonicTransform::HarmonicTransform(GridRef grid, int lmax) : grid_(std::move(grid)), lmax_(lmax) {
  if (!grid_) throw DomainError("HarmonicTransform: null grid");
  if (grid_->dim() != 2) throw DomainError("HarmonicTransform: harmonic transforms exist for n = 2 only");
  if (lmax < 0) throw DomainError("HarmonicTransform: negative band limit");
  if (lmax > grid_->max_band_limit()) {
    throw ResolutionError("HarmonicTransform: band limit " + std::to_string(lmax) +
                          " exceeds grid capability " + std::to_string(grid_->max_band_limit()));
  }
  const int polar = grid_->polar();
  const int azim = grid_->azimuthal();
  tri_size_ = tri(lmax, lmax) + 1;
  legendre_.assign(tri_size_ * polar, 0.0);
  for (int j = 0; j < polar; ++j) {
    const double z = grid_->ring_z()[j];
    const double rho = std::sqrt((1.0 - z) * (1.0 + z));
    double* row = legendre_.data() + tri_size_ * j;
    legendre_q(lmax, z, row, nullptr);
    double rm = 1.0;
    for (int m = 0; m <= lmax; ++m) {
      if (m > 0) rm *= rho;
      for (int k = m; k <= lmax; ++k) row[tri(k, m)] *= rm;
    }
  }
  cos_table_.assign(static_cast<std::size_t>(lmax + 1) * azim, 0.0);
  sin_table_.assign(static_cast<std::size_t>(lmax + 1) * azim, 0.0);
  const double dphi = 2.0 * std::numbers::pi / azim;
  for (int m = 0; m <= lmax; ++m) {
    for (int k = 0; k < azim; ++k) {
      // reduce m*k modulo azim so the angle stays exact for large products
      const double ang = static_cast<double>((static_cast<long>(m) * k) % azim) * dphi;
      cos_table_[static_cast<std::size_t>(m) * azim + k] = std::cos(ang);
      sin_table_[static_cast<std::size_t>(m) * azim + k] = std::sin(ang);
    }
  }
}

SpectralField HarmonicTransform::forward(const GridField& f) const {
  if (f.grid != grid_ && f.grid->counts() != grid_->counts()) {
    throw DomainError("sht_forward: field lives on a different grid");
  }
  const int polar = grid_->polar();
  const int azim = grid_->azimuthal();
  const double sqrt2 = std::numbers::sqrt2;
  SpectralField out(lmax_);
  std::vector<double> a(lmax_ + 1), b(lmax_ + 1);
  for (int j = 0; j < polar; ++j) {
    const double* ring = f.values.data() + static_cast<std::size_t>(j) * azim;
    const double w = grid_->ring_weight()[j];
    for (int m = 0; m <= lmax_; ++m) {
      a[m] = simd::dot(ring, cos_table_.data() + static_cast<std::size_t>(m) * azim, azim);
      b[m] = m == 0 ? 0.0 : simd::dot(ring, sin_table_.data() + static_cast<std::size_t>(m) * azim, azim);
    }
    const double* leg = legendre_.data() + tri_size_ * j;
    for (int m = 0; m <= lmax_; ++m) {
      const double s = (m == 0 ? 1.0 : sqrt2) * w;
      const double am = s * a[m];
      const double bm = s * b[m];
      for (int k = m; k <= lmax_; ++k) {
        const double p = leg[tri(k, m)];
        out.coeffs[SpectralField::index(k, m)] += p * am;
        if (m > 0) out.coeffs[SpectralField::index(k, -m)] += p * bm;
      }
    }
  }
  return out;
}

GridField HarmonicTransform::inverse(const SpectralField& c) const {
  const int polar = grid_->polar();
  const int azim = grid_->azimuthal();
  const int L = std::min(lmax_, c.lmax);
  if (c.lmax > lmax_) {
    // content above the transform band limit would be silently dropped
    for (int k = lmax_ + 1; k <= c.lmax; ++k)
      for (int m = -k; m <= k; ++m)
        if (c.at(k, m) != 0.0) throw ResolutionError("sht_inverse: coefficients exceed transform band limit");
  }
  const double sqrt2 = std::numbers::sqrt2;
  GridField out(grid_);
  std::vector<double> A(L + 1), B(L + 1);
  for (int j = 0; j < polar; ++j) {
    const double* leg = legendre_.data() + tri_size_ * j;
    for (int m = 0; m <= L; ++m) {
      double sa = 0.0, sb = 0.0;
      for (int k = m; k <= L; ++k) {
        const double p = leg[tri(k, m)];
        sa += p * c.coeffs[SpectralField::index(k, m)];
        if (m > 0) sb += p * c.coeffs[SpectralField::index(k, -m)];
      }
      const double s = m == 0 ? 1.0 : sqrt2;
      A[m] = s * sa;
      B[m] = s * sb;
    }
    double* ring = out.values.data() + static_cast<std::size_t>(j) * azim;
    for (int m = 0; m <= L; ++m) {
      simd::axpy(A[m], cos_table_.data() + static_cast<std::size_t>(m) * azim, ring, azim);
      if (m > 0) simd::axpy(B[m], sin_table_.data() + static_cast<std::size_t>(m) * azim, ring, azim);
    }
  }
  return out;
}

SpectralField sht_forward(const GridField& f, int lmax) { return HarmonicTransform(f.grid, lmax).forward(f); }

GridField sht_inverse(const SpectralField& c, const GridRef& grid) {
  return HarmonicTransform(grid, c.lmax).inverse(c);
}

HarmonicEvaluator::HarmonicEvaluator(int lmax) : lmax_(lmax) {
  if (lmax < 0) throw DomainError("HarmonicEvaluator: negative band limit");
  q_.assign(tri(lmax, lmax) + 1, 0.0);
  dq_.assign(q_.size(), 0.0);
  re_.assign(lmax + 1, 0.0);
  im_.assign(lmax + 1, 0.0);
}

void HarmonicEvaluator::fill(const Vec4& x, bool with_derivative) {
  legendre_q(lmax_, x[2], q_.data(), with_derivative ? dq_.data() : nullptr);
  re_[0] = 1.0;
  im_[0] = 0.0;
  for (int m = 1; m <= lmax_; ++m) {
    re_[m] = re_[m - 1] * x[0] - im_[m - 1] * x[1];
    im_[m] = re_[m - 1] * x[1] + im_[m - 1] * x[0];
  }
}

void HarmonicEvaluator::basis(const Vec4& x, std::vector<double>& out) {
  fill(x, false);
  out.assign(SpectralField::count(lmax_), 0.0);
  const double sqrt2 = std::numbers::sqrt2;
  for (int k = 0; k <= lmax_; ++k) {
    out[SpectralField::index(k, 0)] = q_[tri(k, 0)];
    for (int m = 1; m <= k; ++m) {
      const double q = sqrt2 * q_[tri(k, m)];
      out[SpectralField::index(k, m)] = q * re_[m];
      out[SpectralField::index(k, -m)] = q * im_[m];
    }
  }
}

double HarmonicEvaluator::value(const SpectralField& c, const Vec4& x) {
  if (c.lmax > lmax_) throw DomainError("HarmonicEvaluator: field band limit too large");
  fill(x, false);
  const double sqrt2 = std::numbers::sqrt2;
  double v = 0.0;
  for (int m = 0; m <= c.lmax; ++m) {
    double sa = 0.0, sb = 0.0;
    for (int k = m; k <= c.lmax; ++k) {
      sa += q_[tri(k, m)] * c.coeffs[SpectralField::index(k, m)];
      if (m > 0) sb += q_[tri(k, m)] * c.coeffs[SpectralField::index(k, -m)];
    }
    v += m == 0 ? sa : sqrt2 * (sa * re_[m] + sb * im_[m]);
  }
  return v;
}

double HarmonicEvaluator::value_gradient(const SpectralField& c, const Vec4& x, Vec4& grad) {
  if (c.lmax > lmax_) throw DomainError("HarmonicEvaluator: field band limit too large");
  fill(x, true);
  const double sqrt2 = std::numbers::sqrt2;
  double v = 0.0;
  Vec4 g{0.0, 0.0, 0.0, 0.0};
  for (int m = 0; m <= c.lmax; ++m) {
    double sa = 0.0, sb = 0.0, dsa = 0.0, dsb = 0.0;
    for (int k = m; k <= c.lmax; ++k) {
      const double ca = c.coeffs[SpectralField::index(k, m)];
      sa += q_[tri(k, m)] * ca;
      dsa += dq_[tri(k, m)] * ca;
      if (m > 0) {
        const double cb = c.coeffs[SpectralField::index(k, -m)];
        sb += q_[tri(k, m)] * cb;
        dsb += dq_[tri(k, m)] * cb;
      }
    }
    if (m == 0) {
      v += sa;
      g[2] += dsa;
    } else {
      // d/dx Re w^m = m Re w^{m-1}, d/dy Re w^m = -m Im w^{m-1}; similarly for Im
      const double rm1 = re_[m - 1], im1 = im_[m - 1];
      v += sqrt2 * (sa * re_[m] + sb * im_[m]);
      g[0] += sqrt2 * m * (sa * rm1 + sb * im1);
      g[1] += sqrt2 * m * (-sa * im1 + sb * rm1);
      g[2] += sqrt2 * (dsa * re_[m] + dsb * im_[m]);
    }
  }
  grad = tangential(x, g);
  return v;
}

std::vector<double> synthesize_at(const SpectralField& c, const std::vector<Vec4>& points) {
  HarmonicEvaluator ev(c.lmax);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = ev.value(c, points[i]);
  return out;
}

GridField harmonic_field(const GridRef& grid, int k, int m) {
  if (k < 0 || std::abs(m) > k) throw DomainError("harmonic_field: invalid index");
  SpectralField c(k);
  c.at(k, m) = 1.0;
  return GridField(grid, synthesize_at(c, grid->nodes()));
}

SpectralField laplacian(const SpectralField& c) {
  SpectralField out = c;
  for (int k = 0; k <= c.lmax; ++k)
    for (int m = -k; m <= k; ++m) out.at(k, m) *= -static_cast<double>(k) * (k + 1);
  return out;
}

}  // namespace fracsphere
