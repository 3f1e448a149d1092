#include "toral/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <cblas.h>

namespace toral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Interleaved (re, im) view used by the inner kernels; the standard guarantees
// the layout of std::complex<double>.
inline double* as_real(cplx* p) { return reinterpret_cast<double*>(p); }
inline const double* as_real(const cplx* p) { return reinterpret_cast<const double*>(p); }

// c += a * s over n complex entries.
inline void axpy(std::size_t n, cplx s, const cplx* a, cplx* c) {
  const double sr = s.real();
  const double si = s.imag();
  const double* x = as_real(a);
  double* y = as_real(c);
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[2 * i];
    const double xi = x[2 * i + 1];
    y[2 * i] += xr * sr - xi * si;
    y[2 * i + 1] += xr * si + xi * sr;
  }
}

// sum conj(a_i) b_i
inline cplx dotc(std::size_t n, const cplx* a, const cplx* b) {
  const double* x = as_real(a);
  const double* y = as_real(b);
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[2 * i] * y[2 * i] + x[2 * i + 1] * y[2 * i + 1];
    im += x[2 * i] * y[2 * i + 1] - x[2 * i + 1] * y[2 * i];
  }
  return {re, im};
}

// Hermitian part with exactly conjugate-symmetric storage.
CMatrix symmetrized(const CMatrix& a) {
  const std::size_t n = a.dim();
  CMatrix h(n);
  for (std::size_t j = 0; j < n; ++j) {
    h(j, j) = a(j, j).real();
    for (std::size_t i = j + 1; i < n; ++i) {
      const cplx v = 0.5 * (a(i, j) + std::conj(a(j, i)));
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  }
  return h;
}

bool exactly_hermitian(const CMatrix& a) {
  const std::size_t n = a.dim();
  for (std::size_t j = 0; j < n; ++j) {
    if (a(j, j).imag() != 0.0) return false;
    for (std::size_t i = j + 1; i < n; ++i) {
      if (a(i, j) != std::conj(a(j, i))) return false;
    }
  }
  return true;
}

bool exactly_skew_hermitian(const CMatrix& a) {
  const std::size_t n = a.dim();
  for (std::size_t j = 0; j < n; ++j) {
    if (a(j, j).real() != 0.0) return false;
    for (std::size_t i = j + 1; i < n; ++i) {
      if (a(i, j) != -std::conj(a(j, i))) return false;
    }
  }
  return true;
}

// Householder reduction of an exactly Hermitian matrix to real symmetric
// tridiagonal form (diag d, off-diagonal magnitudes e).
void tridiagonalize(CMatrix a, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = a.dim();
  d.assign(n, 0.0);
  e.assign(n > 0 ? n - 1 : 0, 0.0);
  std::vector<cplx> v(n);
  std::vector<cplx> p(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    cplx* x = a.column(k) + k + 1;
    double xnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) xnorm2 += std::norm(x[i]);
    const double xnorm = std::sqrt(xnorm2);
    double tail2 = xnorm2 - std::norm(x[0]);
    if (xnorm == 0.0 || tail2 <= 1e-300 * std::max(1.0, xnorm2)) {
      e[k] = std::abs(x[0]);
      continue;
    }
    const double ax0 = std::abs(x[0]);
    const cplx phase = ax0 == 0.0 ? cplx(1.0, 0.0) : x[0] / ax0;
    const cplx alpha = -phase * xnorm;
    // v = x - alpha e1, normalized
    for (std::size_t i = 0; i < m; ++i) v[i] = x[i];
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) vnorm2 += std::norm(v[i]);
    const double inv = 1.0 / std::sqrt(vnorm2);
    for (std::size_t i = 0; i < m; ++i) v[i] *= inv;
    // p = A22 v, w = p - (v* p) v, A22 -= 2 (v w* + w v*); lower triangle only
    cplx* a22 = a.column(k + 1) + k + 1;
    const int mi = static_cast<int>(m);
    const int ld = static_cast<int>(n);
    const cplx one(1.0, 0.0);
    const cplx zero(0.0, 0.0);
    cblas_zhemv(CblasColMajor, CblasLower, mi, &one, a22, ld, v.data(), 1, &zero, p.data(), 1);
    const double vp = dotc(m, v.data(), p.data()).real();
    for (std::size_t i = 0; i < m; ++i) p[i] -= vp * v[i];
    const cplx minus_two(-2.0, 0.0);
    cblas_zher2(CblasColMajor, CblasLower, mi, &minus_two, v.data(), 1, p.data(), 1, a22, ld);
    e[k] = xnorm;
    for (std::size_t i = 0; i < m; ++i) x[i] = 0.0;
    x[0] = alpha;
  }
  if (n >= 2) e[n - 2] = std::abs(a(n - 1, n - 2));
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
}

// Number of eigenvalues of the tridiagonal matrix strictly below x.
std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  std::size_t count = 0;
  double q = 1.0;
  const double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1];
    q = d[i] - x - (i == 0 ? 0.0 : off / q);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

// Largest (want_max) or smallest eigenvalue by bisection.
double extreme_eigenvalue(const std::vector<double>& d, const std::vector<double>& e,
                          bool want_max) {
  const std::size_t n = d.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? e[i - 1] : 0.0) + (i + 1 < n ? e[i] : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  if (scale == 0.0) return 0.0;
  lo -= 1e-300;
  hi += 1e-300;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const std::size_t below = sturm_count(d, e, mid);
    if (want_max) {
      if (below >= n) hi = mid;
      else lo = mid;
    } else {
      if (below >= 1) hi = mid;
      else lo = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * scale) break;
  }
  return 0.5 * (lo + hi);
}

double spectral_radius_exact_hermitian(const CMatrix& h) {
  if (h.dim() == 1) return std::abs(h(0, 0).real());
  std::vector<double> d;
  std::vector<double> e;
  tridiagonalize(h, d, e);
  return std::max(std::abs(extreme_eigenvalue(d, e, true)),
                  std::abs(extreme_eigenvalue(d, e, false)));
}

// Make the first largest-magnitude entry of every column real and positive.
void normalize_column_phases(CMatrix& q) {
  const std::size_t n = q.dim();
  for (std::size_t j = 0; j < n; ++j) {
    cplx* col = q.column(j);
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(col[i]);
      if (a > best_abs * (1.0 + 1e-12)) {
        best_abs = a;
        best = i;
      }
    }
    if (best_abs <= 0.0) continue;
    const cplx ph = std::conj(col[best]) / best_abs;
    for (std::size_t i = 0; i < n; ++i) col[i] *= ph;
    col[best] = cplx(std::abs(col[best]), 0.0);
  }
}

double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

}  // namespace

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::diagonal(std::span<const cplx> entries) {
  CMatrix m(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

CMatrix CMatrix::diagonal(std::span<const double> entries) {
  CMatrix m(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix r(n_);
  for (std::size_t j = 0; j < n_; ++j)
    for (std::size_t i = 0; i < n_; ++i) r(j, i) = std::conj((*this)(i, j));
  return r;
}

cplx CMatrix::trace() const {
  cplx t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double CMatrix::frobenius() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

bool CMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

std::vector<cplx> CMatrix::diagonal_entries() const {
  std::vector<cplx> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = (*this)(i, i);
  return d;
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
  require_same_dim(*this, other, "matrix addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
  require_same_dim(*this, other, "matrix subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
  for (auto& z : data_) z *= s;
  return *this;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator-(CMatrix a) { return a *= -1.0; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
CMatrix operator*(CMatrix a, cplx s) { return a *= s; }

namespace {

CMatrix gemm(const CMatrix& a, CBLAS_TRANSPOSE ta, const CMatrix& b, CBLAS_TRANSPOSE tb) {
  const int n = static_cast<int>(a.dim());
  CMatrix c(a.dim());
  if (n == 0) return c;
  const cplx one(1.0, 0.0);
  const cplx zero(0.0, 0.0);
  cblas_zgemm(CblasColMajor, ta, tb, n, n, n, &one, a.data(), n, b.data(), n, &zero, c.data(), n);
  return c;
}

}  // namespace

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  require_same_dim(a, b, "matrix product");
  return gemm(a, CblasNoTrans, b, CblasNoTrans);
}

CMatrix adjoint_times(const CMatrix& a, const CMatrix& b) {
  require_same_dim(a, b, "adjoint product");
  return gemm(a, CblasConjTrans, b, CblasNoTrans);
}

CMatrix times_adjoint(const CMatrix& a, const CMatrix& b) {
  require_same_dim(a, b, "adjoint product");
  return gemm(a, CblasNoTrans, b, CblasConjTrans);
}

CMatrix conjugate_by(const CMatrix& q, const CMatrix& a) { return adjoint_times(q, a * q); }

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  require_same_dim(a, b, "commutator");
  return a * b - b * a;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  const std::size_t na = a.dim();
  const std::size_t nb = b.dim();
  CMatrix r(na * nb);
  for (std::size_t ja = 0; ja < na; ++ja)
    for (std::size_t ia = 0; ia < na; ++ia) {
      const cplx s = a(ia, ja);
      if (s == cplx{}) continue;
      for (std::size_t jb = 0; jb < nb; ++jb)
        for (std::size_t ib = 0; ib < nb; ++ib) r(ia * nb + ib, ja * nb + jb) = s * b(ib, jb);
    }
  return r;
}

CMatrix direct_sum(const CMatrix& a, const CMatrix& b) {
  const std::size_t na = a.dim();
  const std::size_t nb = b.dim();
  CMatrix r(na + nb);
  for (std::size_t j = 0; j < na; ++j)
    for (std::size_t i = 0; i < na; ++i) r(i, j) = a(i, j);
  for (std::size_t j = 0; j < nb; ++j)
    for (std::size_t i = 0; i < nb; ++i) r(na + i, na + j) = b(i, j);
  return r;
}

CMatrix block(const CMatrix& a, std::size_t row, std::size_t col, std::size_t k) {
  if (row + k > a.dim() || col + k > a.dim()) throw InputError("block exceeds matrix bounds");
  CMatrix r(k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < k; ++i) r(i, j) = a(row + i, col + j);
  return r;
}

double herm_op_norm(const CMatrix& a) {
  if (a.empty()) return 0.0;
  return spectral_radius_exact_hermitian(symmetrized(a));
}

double op_norm(const CMatrix& a) {
  require_finite(a, "op_norm");
  const std::size_t n = a.dim();
  if (n == 0) return 0.0;
  if (n == 1) return std::abs(a(0, 0));
  if (exactly_hermitian(a)) return spectral_radius_exact_hermitian(a);
  if (exactly_skew_hermitian(a)) return spectral_radius_exact_hermitian(cplx(0.0, 1.0) * a);
  const double fro = a.frobenius();
  if (fro == 0.0) return 0.0;
  // Scale so that A*A neither underflows nor overflows.
  const CMatrix s = (1.0 / fro) * a;
  const CMatrix gram = symmetrized(adjoint_times(s, s));
  std::vector<double> d;
  std::vector<double> e;
  tridiagonalize(gram, d, e);
  const double top = std::max(0.0, extreme_eigenvalue(d, e, true));
  return fro * std::sqrt(top);
}

double op_distance(const CMatrix& a, const CMatrix& b) { return op_norm(a - b); }

HermEig herm_eig(const CMatrix& input) {
  require_finite(input, "herm_eig");
  const std::size_t n = input.dim();
  if (!exactly_hermitian(input)) {
    const CMatrix skew = input - input.adjoint();
    if (skew.frobenius() != 0.0) {
      const double scale = op_norm(input);
      if (herm_op_norm(cplx(0.0, 1.0) * skew) > 1e-10 * scale)
        throw PreconditionError("herm_eig: matrix is not Hermitian within 1e-10*||A||");
    }
  }
  CMatrix a = symmetrized(input);
  CMatrix q = CMatrix::identity(n);
  const double fro = a.frobenius();
  const double threshold = 1e-13 * fro;

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = j + 1; i < n; ++i) s += 2.0 * std::norm(a(i, j));
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 40 && fro > 0.0; ++sweep) {
    if (off_norm() <= threshold) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const cplx apr = a(p, r);
        const double mag = std::abs(apr);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double arr = a(r, r).real();
        if (mag <= 1e-18 * fro && std::abs(app - arr) > 0.0) continue;
        const double theta = (arr - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const cplx ph = apr / mag;
        // G = [[c, s ph], [-s conj(ph), c]]; A <- A G on columns p and r
        const double g01r = s * ph.real(), g01i = s * ph.imag();
        const double g10r = -g01r, g10i = g01i;
        double* cp = as_real(a.column(p));
        double* cr = as_real(a.column(r));
        for (std::size_t i = 0; i < 2 * n; i += 2) {
          const double xr = cp[i], xi = cp[i + 1], yr = cr[i], yi = cr[i + 1];
          cp[i] = c * xr + g10r * yr - g10i * yi;
          cp[i + 1] = c * xi + g10r * yi + g10i * yr;
          cr[i] = g01r * xr - g01i * xi + c * yr;
          cr[i + 1] = g01r * xi + g01i * xr + c * yi;
        }
        // A <- G* A: the 2x2 block explicitly, rows p and r by Hermitian symmetry
        const double npp = c * cp[2 * p] + g10r * cp[2 * r] + g10i * cp[2 * r + 1];
        const double nrr = g01r * cr[2 * p] + g01i * cr[2 * p + 1] + c * cr[2 * r];
        for (std::size_t j = 0; j < n; ++j) {
          a(p, j) = cplx(cp[2 * j], -cp[2 * j + 1]);
          a(r, j) = cplx(cr[2 * j], -cr[2 * j + 1]);
        }
        a(p, r) = 0.0;
        a(r, p) = 0.0;
        a(p, p) = npp;
        a(r, r) = nrr;
        double* qp = as_real(q.column(p));
        double* qr = as_real(q.column(r));
        for (std::size_t i = 0; i < 2 * n; i += 2) {
          const double xr = qp[i], xi = qp[i + 1], yr = qr[i], yi = qr[i + 1];
          qp[i] = c * xr + g10r * yr - g10i * yi;
          qp[i + 1] = c * xi + g10r * yi + g10i * yr;
          qr[i] = g01r * xr - g01i * xi + c * yr;
          qr[i + 1] = g01r * xi + g01i * xr + c * yi;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x).real() < a(y, y).real();
  });
  HermEig out{CMatrix(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    std::copy(q.column(order[k]), q.column(order[k]) + n, out.vectors.column(k));
  }
  normalize_column_phases(out.vectors);
  return out;
}

CMatrix from_eigen(const CMatrix& q, std::span<const double> values) {
  CMatrix scaled = q;
  const std::size_t n = q.dim();
  for (std::size_t j = 0; j < n; ++j) {
    cplx* col = scaled.column(j);
    for (std::size_t i = 0; i < n; ++i) col[i] *= values[j];
  }
  return times_adjoint(scaled, q);
}

CMatrix from_eigen(const CMatrix& q, std::span<const cplx> values) {
  CMatrix scaled = q;
  const std::size_t n = q.dim();
  for (std::size_t j = 0; j < n; ++j) {
    cplx* col = scaled.column(j);
    for (std::size_t i = 0; i < n; ++i) col[i] *= values[j];
  }
  return times_adjoint(scaled, q);
}

namespace {

// Recursive step: returns a unitary diagonalizing every part (restricted to the
// current subspace) as far as the cluster tolerance allows.
CMatrix split_recursive(const std::vector<CMatrix>& parts, double abs_tol, std::mt19937_64& rng,
                        int depth) {
  const std::size_t k = parts.front().dim();
  if (k == 1) return CMatrix::identity(1);
  std::uniform_real_distribution<double> coeff(1.0, 2.0);
  CMatrix combo(k);
  for (const auto& p : parts) combo += coeff(rng) * p;
  const HermEig eig = herm_eig(combo);

  std::vector<std::pair<std::size_t, std::size_t>> clusters;  // [begin, end)
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= k; ++i) {
    if (i == k || eig.values[i] - eig.values[i - 1] > abs_tol) {
      clusters.emplace_back(begin, i);
      begin = i;
    }
  }
  if (clusters.size() == 1 || depth > 64) return eig.vectors;

  CMatrix q = eig.vectors;
  for (const auto& [b, e] : clusters) {
    const std::size_t m = e - b;
    if (m == 1) continue;
    // Restrict every part to the cluster subspace.
    std::vector<cplx> basis(k * m);
    for (std::size_t c = 0; c < m; ++c)
      std::copy(eig.vectors.column(b + c), eig.vectors.column(b + c) + k, basis.begin() + c * k);
    std::vector<CMatrix> restricted;
    restricted.reserve(parts.size());
    for (const auto& p : parts) {
      CMatrix r(m);
      for (std::size_t jc = 0; jc < m; ++jc) {
        std::vector<cplx> pv(k, cplx{});
        for (std::size_t l = 0; l < k; ++l) axpy(k, basis[jc * k + l], p.column(l), pv.data());
        for (std::size_t ic = 0; ic < m; ++ic) r(ic, jc) = dotc(k, basis.data() + ic * k, pv.data());
      }
      restricted.push_back(symmetrized(r));
    }
    const CMatrix sub = split_recursive(restricted, abs_tol, rng, depth + 1);
    for (std::size_t jc = 0; jc < m; ++jc) {
      cplx* dst = q.column(b + jc);
      std::fill(dst, dst + k, cplx{});
      for (std::size_t l = 0; l < m; ++l) axpy(k, sub(l, jc), basis.data() + l * k, dst);
    }
  }
  return q;
}

double off_diagonal_norm(const CMatrix& d) {
  CMatrix off = d;
  for (std::size_t i = 0; i < off.dim(); ++i) off(i, i) = 0.0;
  return herm_op_norm(off);
}

}  // namespace

JointHermDiag joint_herm_diagonalize(std::span<const CMatrix> parts, double cluster_tol,
                                     double residual_target, std::uint64_t seed, int retries) {
  if (parts.empty()) throw InputError("joint_herm_diagonalize: no matrices");
  const std::size_t n = parts.front().dim();
  std::vector<CMatrix> herm;
  herm.reserve(parts.size());
  double scale = 0.0;
  for (const auto& p : parts) {
    if (p.dim() != n) throw InputError("joint_herm_diagonalize: mixed dimensions");
    require_finite(p, "joint_herm_diagonalize");
    herm.push_back(symmetrized(p));
    scale = std::max(scale, herm_op_norm(herm.back()));
  }
  const double abs_tol = cluster_tol * std::max(scale, 1e-300) * static_cast<double>(parts.size());

  std::mt19937_64 rng(seed);
  double worst_seen = std::numeric_limits<double>::infinity();
  JointHermDiag best;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    CMatrix q = split_recursive(herm, abs_tol, rng, 0);
    JointHermDiag out;
    out.q = q;
    out.residual = 0.0;
    for (const auto& p : herm) {
      const CMatrix d = conjugate_by(q, p);
      out.residual = std::max(out.residual, off_diagonal_norm(d));
      std::vector<double> diag(n);
      for (std::size_t i = 0; i < n; ++i) diag[i] = d(i, i).real();
      out.diagonals.push_back(std::move(diag));
    }
    if (out.residual <= residual_target) return out;
    if (out.residual < worst_seen) {
      worst_seen = out.residual;
      best = std::move(out);
    }
  }
  throw DiagnosticsError("joint diagonalization did not reach its residual target", worst_seen);
}

NormalEig normal_eig(const CMatrix& a, double tol) {
  require_finite(a, "normal_eig");
  const std::size_t n = a.dim();
  const double scale = op_norm(a);
  const double defect = normality_defect(a);
  if (defect > tol * std::max(scale, 1e-300) && defect > 1e-14)
    throw PreconditionError("normal_eig: matrix is not normal within tolerance");
  const CMatrix adj = a.adjoint();
  const CMatrix re = 0.5 * (a + adj);
  const CMatrix im = cplx(0.0, -0.5) * (a - adj);
  const std::vector<CMatrix> parts{re, im};
  const double target = std::max(10.0 * tol * scale, 1e-12 * std::max(scale, 1.0));
  const JointHermDiag jd = joint_herm_diagonalize(parts, 1e-10, target);
  NormalEig out{jd.q, std::vector<cplx>(n)};
  for (std::size_t i = 0; i < n; ++i) out.values[i] = {jd.diagonals[0][i], jd.diagonals[1][i]};
  return out;
}

CMatrix exp_i_herm(const CMatrix& h, double theta) {
  const HermEig eig = herm_eig(h);
  std::vector<cplx> phases(h.dim());
  for (std::size_t i = 0; i < phases.size(); ++i)
    phases[i] = std::polar(1.0, theta * eig.values[i]);
  return from_eigen(eig.vectors, phases);
}

CMatrix gap_branch_log(const CMatrix& u) {
  const std::size_t n = u.dim();
  if (n == 0) return {};
  if (unitarity_defect(u) > 1e-10) throw PreconditionError("gap_branch_log: matrix is not unitary");
  const NormalEig eig = normal_eig(u, 1e-10);
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i) angles[i] = wrap_angle(std::arg(eig.values[i]));
  std::vector<double> sorted = angles;
  std::sort(sorted.begin(), sorted.end());
  // Widest gap of the sorted angles on the circle; ties go to the smaller start.
  double best_len = -1.0;
  double best_start = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double start = sorted[k];
    const double len = (k + 1 < n ? sorted[k + 1] : sorted[0] + kTwoPi) - start;
    if (len > best_len + 1e-12) {
      best_len = len;
      best_start = start;
    }
  }
  const double cut = best_start + 0.5 * best_len;
  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Representative of the angle in (cut - 2pi, cut].
    double a = angles[i];
    while (a > cut) a -= kTwoPi;
    while (a <= cut - kTwoPi) a += kTwoPi;
    logs[i] = a;
  }
  // A global 2pi shift keeps the branch; take the one with the smallest norm.
  const auto [lo, hi] = std::minmax_element(logs.begin(), logs.end());
  const double spread0 = std::max(std::abs(*lo), std::abs(*hi));
  double shift = 0.0;
  for (const double s : {-kTwoPi, kTwoPi}) {
    if (std::max(std::abs(*lo + s), std::abs(*hi + s)) < spread0 - 1e-12) shift = s;
  }
  if (shift != 0.0)
    for (double& l : logs) l += shift;
  CMatrix h = from_eigen(eig.vectors, logs);
  return symmetrized(h);
}

CMatrix principal_log_unitary(const CMatrix& u, double branch_tol) {
  const std::size_t n = u.dim();
  if (unitarity_defect(u) > 1e-9) throw PreconditionError("principal_log_unitary: matrix is not unitary");
  const NormalEig eig = normal_eig(u, 1e-9);
  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(eig.values[i] + 1.0) <= branch_tol)
      throw BranchError("principal logarithm undefined: -1 lies in the spectrum");
    logs[i] = std::arg(eig.values[i]);
  }
  return symmetrized(from_eigen(eig.vectors, logs));
}

double normality_defect(const CMatrix& a) {
  return herm_op_norm(adjoint_times(a, a) - times_adjoint(a, a));
}

double unitarity_defect(const CMatrix& a) {
  return herm_op_norm(adjoint_times(a, a) - CMatrix::identity(a.dim()));
}

double hermiticity_defect(const CMatrix& a) {
  return herm_op_norm(cplx(0.0, 1.0) * (a - a.adjoint()));
}

DefectReport defect_report(const CMatrix& a) {
  require_finite(a, "defect_report");
  DefectReport r;
  r.normality = normality_defect(a);
  r.unitarity = unitarity_defect(a);
  r.hermiticity = hermiticity_defect(a);
  r.norm = op_norm(a);
  r.contraction_excess = std::max(0.0, r.norm - 1.0);
  return r;
}

CMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      m(i, j) = {re, im};
    }
  return m;
}

CMatrix random_hermitian(std::size_t n, std::mt19937_64& rng) {
  const CMatrix m = random_matrix(n, rng);
  return symmetrized(m);
}

CMatrix random_unitary(std::size_t n, std::mt19937_64& rng) {
  CMatrix q = random_matrix(n, rng);
  // Modified Gram-Schmidt, applied twice for orthogonality to rounding level.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx* qj = q.column(j);
      for (std::size_t k = 0; k < j; ++k) {
        const cplx proj = dotc(n, q.column(k), qj);
        axpy(n, -proj, q.column(k), qj);
      }
      const double nrm = std::sqrt(dotc(n, qj, qj).real());
      for (std::size_t i = 0; i < n; ++i) qj[i] /= nrm;
    }
  }
  return q;
}

void require_same_dim(const CMatrix& a, const CMatrix& b, const char* what) {
  if (a.dim() != b.dim())
    throw InputError(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                     " vs " + std::to_string(b.dim()) + ")");
}

void require_finite(const CMatrix& a, const char* what) {
  if (!a.all_finite()) throw InputError(std::string(what) + ": non-finite entries");
}

}  // namespace toral
