#include "toral/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace toral {

CMatrix iota2(const CMatrix& x) { return direct_sum(x, x); }

CMatrix kappa_compress(const CMatrix& x) {
  if (x.dim() % 2 != 0) throw InputError("kappa_compress: dimension must be even");
  return block(x, 0, 0, x.dim() / 2);
}

CMatrix LiftedHom::apply(const CMatrix& x) const {
  require_same_dim(x, v, "LiftedHom::apply");
  const CMatrix v2 = v * v;
  return direct_sum(x, conjugate_by(v2, x));
}

LiftedHom z2_dilation(const CMatrix& w) {
  require_finite(w, "z2_dilation");
  if (unitarity_defect(w) > 1e-9) throw PreconditionError("z2_dilation: W must be unitary");
  const std::size_t n = w.dim();
  LiftedHom h;
  h.v = w;
  h.what_s = CMatrix(2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      h.what_s(i, n + j) = w(i, j);
      h.what_s(n + i, j) = std::conj(w(j, i));
    }
  return h;
}

CMatrix std_dilation(const CMatrix& w) {
  if (unitarity_defect(w) > 1e-9) throw PreconditionError("std_dilation: W must be unitary");
  return direct_sum(w, w);
}

LiftedLinks lifted_links(const NormalTuple& x, const NormalTuple& y, std::size_t grid, std::uint64_t seed,
                         std::size_t hom_samples) {
  if (x.dim() != y.dim() || x.size() != y.size())
    throw PreconditionError("lifted_links: tuples differ in dimension or length");
  for (const auto* t : {&x, &y})
    for (const auto& m : t->mats())
      if (op_norm(m) > 1.0 + 1e-10) throw PreconditionError("lifted_links: inputs must be contractions");
  const std::size_t n = x.dim();
  const Approximant ap = isospectral_approximant(x, y);

  LiftedLinks out;
  out.phi = z2_dilation(ap.v);
  const CMatrix& ws = out.phi.what_s;
  const CMatrix one = CMatrix::identity(2 * n);
  const CMatrix h = (0.5 * std::numbers::pi) * (ws - one);

  LiftReport& r = out.report;
  r.what_hermiticity = hermiticity_defect(ws);
  r.what_unitarity = unitarity_defect(ws);
  const HermEig heig = herm_eig(h);
  auto exp_h = [&](double theta) {
    std::vector<cplx> ph(heig.values.size());
    for (std::size_t k = 0; k < ph.size(); ++k) ph[k] = std::polar(1.0, theta * heig.values[k]);
    return from_eigen(heig.vectors, ph);
  };
  r.what_exp = op_distance(ws, exp_h(1.0));

  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < hom_samples; ++s) {
    CMatrix a = random_matrix(n, rng);
    CMatrix b = random_matrix(n, rng);
    a *= 1.0 / op_norm(a);
    b *= 1.0 / op_norm(b);
    const CMatrix pa = out.phi.apply(a);
    r.hom_product = std::max(r.hom_product, op_distance(out.phi.apply(a * b), pa * out.phi.apply(b)));
    r.hom_adjoint = std::max(r.hom_adjoint, op_distance(out.phi.apply(a.adjoint()), pa.adjoint()));
  }

  LinkBundle& bundle = out.bundle;
  bundle.mode = LinkMode::Normal;
  bundle.conjugator = h;
  if (grid < 2) grid = 2;
  std::vector<CMatrix> wts;
  for (std::size_t i = 0; i < grid; ++i)
    wts.push_back(exp_h(1.0 - static_cast<double>(i) / static_cast<double>(grid - 1)));
  for (std::size_t j = 0; j < x.size(); ++j) {
    const CMatrix phx = out.phi.apply(x[j]);
    if (!(kappa_compress(phx) == x[j])) r.kappa_exact = false;
    r.phi_offset.push_back(op_distance(phx, iota2(x[j])));
    const CMatrix base = iota2(ap.psi_of_x[j]);
    // e^{iH} = What_s, so theta = -1 gives Ad[What_s](base) = Phi(x_j).
    MatrixPath curved(PathSegment::conj(h, heig, base, -1.0, 0.0));
    MatrixPath flat(PathSegment::flat(base, iota2(y[j])));
    bundle.x.push_back(phx);
    bundle.y.push_back(iota2(y[j]));
    bundle.links.push_back(concat(curved, flat));

    const double ref = op_norm(commutator(ws, base));
    for (std::size_t i = 0; i < grid; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(grid - 1);
      const double lhs = op_norm(commutator(wts[i], base));
      r.decay = std::max(r.decay, std::abs(lhs - std::abs(std::cos(0.5 * std::numbers::pi * t)) * ref));
    }
  }
  bundle.lengths.clear();
  for (std::size_t j = 0; j < bundle.links.size(); ++j) {
    bundle.lengths.push_back(path_length(bundle.links[j]));
    double worst = 0.0;
    for (const auto& s : bundle.links[j].segments())
      worst = std::max(worst, op_distance(s.start(), bundle.y[j]) + s.length());
    bundle.epsilon_reported = std::max(bundle.epsilon_reported, worst);
  }
  return out;
}

}  // namespace toral
