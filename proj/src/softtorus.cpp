#include "toral/softtorus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace toral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Angle of z as a fraction of a full turn, in [0, 1).
double turn_fraction(cplx z) {
  double a = std::arg(z);
  if (a < 0.0) a += kTwoPi;
  const double th = a / kTwoPi;
  return th >= 1.0 ? 0.0 : th;
}

double bott_f(double th) { return th <= 0.5 ? 1.0 - 2.0 * th : 2.0 * th - 1.0; }
double bump(double th) {
  const double f = bott_f(th);
  return std::sqrt(std::max(0.0, f - f * f));
}
double bott_g(double th) { return th <= 0.5 ? bump(th) : 0.0; }
double bott_h(double th) { return th > 0.5 ? bump(th) : 0.0; }

CMatrix pad(const CMatrix& a, std::size_t n) {
  if (a.dim() == n) return a;
  return direct_sum(a, CMatrix::identity(n - a.dim()));
}

}  // namespace

ClockShift clock_shift(std::size_t n) {
  if (n < 1) throw InputError("clock_shift: n must be at least 1");
  ClockShift cs;
  cs.nn = CMatrix(n);
  cs.omega = CMatrix(n);
  cs.sigma = CMatrix(n);
  cs.f = CMatrix(n);
  cs.s2 = CMatrix::identity(n);
  cs.s2(0, 0) = -1.0;
  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t label = n - k;
    cs.nn(k, k) = static_cast<double>(label);
    cs.omega(k, k) = label == n ? cplx(1.0, 0.0) : std::polar(1.0, kTwoPi * static_cast<double>(label) / dn);
    cs.sigma(k, (k + 1) % n) = 1.0;
  }
  const double norm = 1.0 / std::sqrt(dn);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      cs.f(j, k) = norm * std::polar(1.0, -kTwoPi * static_cast<double>((j * k) % n) / dn);
  return cs;
}

AlgebraDimension algebra_dimension(const std::vector<CMatrix>& gens, std::size_t max_len) {
  if (gens.empty()) throw InputError("algebra_dimension: no generators");
  const std::size_t n = gens.front().dim();
  std::vector<CMatrix> letters;
  for (const auto& g : gens) {
    if (g.dim() != n) throw InputError("algebra_dimension: mixed dimensions");
    require_finite(g, "algebra_dimension");
    letters.push_back(g);
    letters.push_back(g.adjoint());
  }
  const std::size_t full = n * n;
  std::vector<CMatrix> basis;  // orthonormal under <A, B> = tr(A* B)

  auto inner = [full](const CMatrix& a, const CMatrix& b) {
    cplx s = 0.0;
    const cplx* pa = a.data();
    const cplx* pb = b.data();
    for (std::size_t i = 0; i < full; ++i) s += std::conj(pa[i]) * pb[i];
    return s;
  };
  auto try_add = [&](CMatrix cand) {
    const double original = cand.frobenius();
    if (original == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) cand -= inner(b, cand) * b;
    const double rest = cand.frobenius();
    if (rest <= 1e-9 * original) return false;
    cand *= 1.0 / rest;
    basis.push_back(std::move(cand));
    return true;
  };

  AlgebraDimension out;
  try_add(CMatrix::identity(n));
  std::size_t fresh_begin = 0;
  std::size_t len = 0;
  while (basis.size() < full) {
    if (len == max_len) {
      out.stabilized = false;
      out.dimension = basis.size();
      out.word_length = len;
      return out;
    }
    ++len;
    const std::size_t fresh_end = basis.size();
    for (std::size_t i = fresh_begin; i < fresh_end && basis.size() < full; ++i)
      for (const auto& l : letters) {
        if (basis.size() == full) break;
        try_add(basis[i] * l);
      }
    if (basis.size() == fresh_end) break;
    fresh_begin = fresh_end;
  }
  out.stabilized = true;
  out.dimension = basis.size();
  out.word_length = len;
  return out;
}

SoftPair soft_pair(std::size_t n, double delta) {
  if (n < 2) throw InputError("soft_pair: n must be at least 2");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InputError("soft_pair: delta must be finite and nonnegative");
  SoftPair p;
  std::size_t m = 0;
  if (delta > 0.0) {
    for (std::size_t k = 2; k <= n; ++k)
      if (2.0 * std::sin(std::numbers::pi / static_cast<double>(k)) <= delta * (1.0 + 1e-12)) {
        m = k;
        break;
      }
  }
  if (m == 0) {
    const ClockShift cs = clock_shift(n);
    p.u = cs.omega;
    p.v = cs.omega * cs.omega;
  } else {
    const ClockShift cs = clock_shift(m);
    p.u = pad(cs.omega, n);
    p.v = pad(cs.sigma, n);
  }
  p.m = m;
  p.defect = op_norm(commutator(p.u, p.v));
  return p;
}

int winding_number(const CMatrix& u, const CMatrix& v) {
  require_same_dim(u, v, "winding_number");
  const CMatrix w = times_adjoint(times_adjoint(u * v, u), v);
  const NormalEig eig = normal_eig(w, 1e-9);
  double total = 0.0;
  for (const auto& z : eig.values) total += std::arg(z);
  return static_cast<int>(std::lround(total / kTwoPi));
}

BottResult bott_index(const CMatrix& u, const CMatrix& v, double gap_tol) {
  require_same_dim(u, v, "bott_index");
  if (unitarity_defect(u) > 1e-9 || unitarity_defect(v) > 1e-9)
    throw PreconditionError("bott_index: u and v must be unitary");
  const std::size_t n = u.dim();
  BottResult r;
  r.defect = op_norm(commutator(u, v));
  r.winding = winding_number(u, v);

  const NormalEig ev = normal_eig(v, 1e-9);
  std::vector<double> fv(n), gv(n), hv(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double th = turn_fraction(ev.values[k]);
    fv[k] = bott_f(th);
    gv[k] = bott_g(th);
    hv[k] = bott_h(th);
  }
  const CMatrix f = from_eigen(ev.vectors, fv);
  const CMatrix g = from_eigen(ev.vectors, gv);
  const CMatrix h = from_eigen(ev.vectors, hv);
  const CMatrix upper = h * u + g;
  const CMatrix lower = adjoint_times(u, h) + g;
  const CMatrix one_minus_f = CMatrix::identity(n) - f;
  CMatrix e(2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      e(i, j) = f(i, j);
      e(i, n + j) = upper(i, j);
      e(n + i, j) = lower(i, j);
      e(n + i, n + j) = one_minus_f(i, j);
    }
  const HermEig eig = herm_eig(e);
  int count = 0;
  r.gap = std::numeric_limits<double>::infinity();
  for (double lambda : eig.values) {
    if (lambda >= 0.5) ++count;
    r.gap = std::min(r.gap, std::abs(lambda - 0.5));
  }
  r.index = count - static_cast<int>(n);
  if (r.gap < gap_tol) throw IndexUndefined(r.gap, r.winding, r.defect);
  return r;
}

}  // namespace toral
