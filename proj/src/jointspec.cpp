#include "toral/jointspec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace toral {

NormalTuple::NormalTuple(std::vector<CMatrix> mats, Options opts)
    : mats_(std::move(mats)), opts_(opts) {
  if (mats_.empty()) throw PreconditionError("NormalTuple: empty tuple");
  const std::size_t n = mats_.front().dim();
  if (n == 0) throw PreconditionError("NormalTuple: zero dimension");
  for (const auto& m : mats_) {
    if (m.dim() != n) throw PreconditionError("NormalTuple: mixed dimensions");
    require_finite(m, "NormalTuple");
  }
  for (std::size_t j = 0; j < mats_.size(); ++j) {
    normality_defect_ = std::max(normality_defect_, toral::normality_defect(mats_[j]));
    if (opts_.contractions && op_norm(mats_[j]) > 1.0 + 1e-10)
      throw PreconditionError("NormalTuple: member " + std::to_string(j) + " is not a contraction");
    for (std::size_t k = j + 1; k < mats_.size(); ++k)
      commutation_defect_ = std::max(commutation_defect_, op_norm(commutator(mats_[j], mats_[k])));
  }
  if (normality_defect_ > opts_.normality_tol)
    throw PreconditionError("NormalTuple: normality defect " + std::to_string(normality_defect_) +
                            " exceeds tolerance");
  if (commutation_defect_ > opts_.commutation_tol)
    throw PreconditionError("NormalTuple: commutation defect " +
                            std::to_string(commutation_defect_) + " exceeds tolerance");
}

std::vector<CMatrix> partition(const NormalTuple& t) {
  std::vector<CMatrix> parts;
  parts.reserve(2 * t.size());
  std::vector<CMatrix> imag;
  imag.reserve(t.size());
  for (const auto& x : t.mats()) {
    const CMatrix adj = x.adjoint();
    parts.push_back(0.5 * (x + adj));
    imag.push_back(cplx(0.0, -0.5) * (x - adj));
  }
  for (auto& m : imag) parts.push_back(std::move(m));
  return parts;
}

namespace {

// Tolerant lexicographic comparison of joint-spectrum rows.
bool row_less(const std::vector<cplx>& a, const std::vector<cplx>& b, double tol) {
  auto cmp = [tol](double x, double y) { return x < y - tol ? -1 : (x > y + tol ? 1 : 0); };
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (const int c = cmp(a[j].real(), b[j].real()); c != 0) return c < 0;
    if (const int c = cmp(a[j].imag(), b[j].imag()); c != 0) return c < 0;
  }
  return false;
}

}  // namespace

JointSpectrum joint_diagonalize(const NormalTuple& t, double cluster_tol, std::uint64_t seed) {
  const std::size_t n = t.dim();
  const std::size_t count = t.size();
  if (t.commutation_defect() > 1e-8 * static_cast<double>(n))
    throw PreconditionError("joint_diagonalize: tuple does not commute within 1e-8*n");
  const double target = std::max(1e-8, 100.0 * t.commutation_defect());
  const std::vector<CMatrix> parts = partition(t);
  const JointHermDiag jd = joint_herm_diagonalize(parts, cluster_tol, target / 4.0, seed);

  std::vector<std::vector<cplx>> rows(n, std::vector<cplx>(count));
  double scale = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < count; ++j) {
      rows[k][j] = {jd.diagonals[j][k], jd.diagonals[count + j][k]};
      scale = std::max(scale, std::abs(rows[k][j]));
    }

  // Insertion sort: stable and safe with a tolerance-based comparison.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const double tol = cluster_tol * std::max(1.0, scale);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t cur = order[i];
    std::size_t pos = i;
    while (pos > 0 && row_less(rows[cur], rows[order[pos - 1]], tol)) {
      order[pos] = order[pos - 1];
      --pos;
    }
    order[pos] = cur;
  }

  JointSpectrum out;
  out.q = CMatrix(n);
  out.points.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.points[k] = rows[order[k]];
    std::copy(jd.q.column(order[k]), jd.q.column(order[k]) + n, out.q.column(k));
  }
  for (std::size_t j = 0; j < count; ++j) {
    CMatrix d = conjugate_by(out.q, t[j]);
    for (std::size_t k = 0; k < n; ++k) d(k, k) = 0.0;
    out.residual = std::max(out.residual, op_norm(d));
  }
  if (out.residual > target)
    throw DiagnosticsError("joint_diagonalize: residual target unreachable", out.residual);
  return out;
}

std::vector<std::vector<cplx>> joint_spectrum(const NormalTuple& t) {
  return joint_diagonalize(t).points;
}

CliffordRep clifford_rep(std::size_t count) {
  CliffordRep rep;
  rep.count = count;
  if (count == 0) return rep;
  const std::size_t qubits = (count + 1) / 2;
  CMatrix id2 = CMatrix::identity(2);
  CMatrix px(2), py(2), pz(2);
  px(0, 1) = 1.0;
  px(1, 0) = 1.0;
  py(0, 1) = cplx(0.0, -1.0);
  py(1, 0) = cplx(0.0, 1.0);
  pz(0, 0) = 1.0;
  pz(1, 1) = -1.0;
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t site = j / 2;
    CMatrix g = CMatrix::identity(1);
    for (std::size_t s = 0; s < qubits; ++s) {
      const CMatrix& factor = s < site ? pz : (s == site ? (j % 2 == 0 ? px : py) : id2);
      g = kron(g, factor);
    }
    rep.gens.push_back(std::move(g));
  }
  return rep;
}

CliffordNorm clifford_norm(const std::vector<CMatrix>& mats) {
  if (mats.empty()) throw InputError("clifford_norm: empty tuple");
  const std::size_t n = mats.front().dim();
  for (const auto& m : mats) {
    if (m.dim() != n) throw InputError("clifford_norm: mixed dimensions");
    require_finite(m, "clifford_norm");
  }
  const CliffordRep rep = clifford_rep(mats.size());
  const std::size_t big = n * rep.gens.front().dim();
  CliffordNorm out{CMatrix(big), 0.0};
  // i * X (x) (i gamma) = -X (x) gamma
  for (std::size_t j = 0; j < mats.size(); ++j) out.matrix -= kron(mats[j], rep.gens[j]);
  out.norm = op_norm(out.matrix);
  return out;
}

}  // namespace toral
