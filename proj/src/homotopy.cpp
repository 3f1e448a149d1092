#include "toral/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace toral {

namespace {

constexpr double kJoinTol = 1e-9;

double scale_of(const CMatrix& a) { return std::max(1.0, op_norm(a)); }

}  // namespace

PathSegment PathSegment::flat(CMatrix a, CMatrix b, double duration) {
  require_same_dim(a, b, "PathSegment::flat");
  require_finite(a, "PathSegment::flat");
  require_finite(b, "PathSegment::flat");
  PathSegment s;
  s.kind_ = Kind::Flat;
  s.length_ = op_distance(a, b);
  s.a_ = std::move(a);
  s.b_ = std::move(b);
  s.set_duration(duration);
  return s;
}

PathSegment PathSegment::conj(CMatrix h, CMatrix base, double theta0, double theta1, double duration) {
  require_same_dim(h, base, "PathSegment::conj");
  const HermEig eig = herm_eig(h);
  return conj(std::move(h), eig, std::move(base), theta0, theta1, duration);
}

PathSegment PathSegment::conj(CMatrix h, const HermEig& eig, CMatrix base, double theta0, double theta1,
                              double duration) {
  require_same_dim(h, base, "PathSegment::conj");
  require_same_dim(eig.vectors, base, "PathSegment::conj");
  require_finite(base, "PathSegment::conj");
  if (!std::isfinite(theta0) || !std::isfinite(theta1)) throw InputError("PathSegment::conj: non-finite angle");
  PathSegment s;
  s.kind_ = Kind::Conj;
  auto e = std::make_shared<Eigen>();
  e->q = eig.vectors;
  e->lambda = eig.values;
  e->rotated = conjugate_by(e->q, base);
  s.length_ = std::abs(theta1 - theta0) * op_norm(commutator(h, base));
  s.a_ = std::move(base);
  s.b_ = std::move(h);
  s.theta0_ = theta0;
  s.theta1_ = theta1;
  s.eig_ = std::move(e);
  s.set_duration(duration);
  return s;
}

PathSegment PathSegment::geodesic(CMatrix base, CMatrix k, double duration) {
  require_same_dim(base, k, "PathSegment::geodesic");
  require_finite(base, "PathSegment::geodesic");
  PathSegment s;
  s.kind_ = Kind::Geodesic;
  const HermEig eig = herm_eig(k);
  auto e = std::make_shared<Eigen>();
  e->q = eig.vectors;
  e->lambda = eig.values;
  // d/ds base e^{isK} = i base K e^{isK}; right factor is unitary.
  s.length_ = op_norm(base * k);
  s.a_ = std::move(base);
  s.b_ = std::move(k);
  s.eig_ = std::move(e);
  s.set_duration(duration);
  return s;
}

void PathSegment::set_duration(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) throw InputError("PathSegment: duration must be positive");
  duration_ = d;
}

CMatrix PathSegment::at(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  switch (kind_) {
    case Kind::Flat:
      if (s == 0.0) return a_;
      if (s == 1.0) return b_;
      return (1.0 - s) * a_ + s * b_;
    case Kind::Conj: {
      const double theta = theta0_ + s * (theta1_ - theta0_);
      const std::size_t n = a_.dim();
      std::vector<cplx> ph(n);
      for (std::size_t k = 0; k < n; ++k) ph[k] = std::polar(1.0, theta * eig_->lambda[k]);
      CMatrix m = eig_->rotated;
      for (std::size_t l = 0; l < n; ++l) {
        cplx* col = m.column(l);
        for (std::size_t k = 0; k < n; ++k) col[k] *= std::conj(ph[k]) * ph[l];
      }
      return times_adjoint(eig_->q * m, eig_->q);
    }
    case Kind::Geodesic: {
      if (s == 0.0) return a_;
      const std::size_t n = a_.dim();
      std::vector<cplx> ph(n);
      for (std::size_t k = 0; k < n; ++k) ph[k] = std::polar(1.0, s * eig_->lambda[k]);
      return a_ * from_eigen(eig_->q, ph);
    }
  }
  return {};
}

MatrixPath::MatrixPath(PathSegment seg) {
  seg.set_duration(1.0);
  segs_.push_back(std::move(seg));
}

MatrixPath MatrixPath::from_segments(std::vector<PathSegment> segs) {
  if (segs.empty()) throw InputError("MatrixPath: no segments");
  double total = 0.0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    total += segs[i].duration();
    if (segs[i].dim() != segs.front().dim()) throw InputError("MatrixPath: mixed dimensions");
    if (i > 0) {
      const CMatrix prev = segs[i - 1].end();
      if (op_distance(prev, segs[i].start()) > kJoinTol * scale_of(prev))
        throw PreconditionError("MatrixPath: segments are not continuous");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("MatrixPath: durations must sum to one");
  MatrixPath p;
  p.segs_ = std::move(segs);
  return p;
}

double MatrixPath::segment_start(std::size_t i) const {
  double t = 0.0;
  for (std::size_t k = 0; k < i; ++k) t += segs_[k].duration();
  return t;
}

std::size_t MatrixPath::segment_index(double t) const {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < segs_.size(); ++i) {
    acc += segs_[i].duration();
    if (t <= acc) return i;
  }
  return segs_.size() - 1;
}

CMatrix MatrixPath::at(double t) const {
  if (segs_.empty()) throw InputError("MatrixPath: empty path");
  t = std::clamp(t, 0.0, 1.0);
  const std::size_t i = segment_index(t);
  const double t0 = segment_start(i);
  return segs_[i].at((t - t0) / segs_[i].duration());
}

double MatrixPath::lipschitz() const {
  double lip = 0.0;
  for (const auto& s : segs_) lip = std::max(lip, s.length() / s.duration());
  return lip;
}

MatrixPath concat(const MatrixPath& x, const MatrixPath& y) {
  if (x.empty() || y.empty()) throw InputError("concat: empty path");
  const CMatrix xe = x.end();
  const CMatrix ys = y.start();
  require_same_dim(xe, ys, "concat");
  if (op_distance(xe, ys) > kJoinTol * scale_of(xe))
    throw PreconditionError("concat: X(1) and Y(0) differ by more than 1e-9");
  MatrixPath out;
  for (const auto* p : {&x, &y})
    for (PathSegment s : p->segs_) {
      s.set_duration(0.5 * s.duration());
      out.segs_.push_back(std::move(s));
    }
  return out;
}

double path_length(const MatrixPath& p) {
  double len = 0.0;
  for (const auto& s : p.segments()) len += s.length();
  return len;
}

double polygonal_length(const MatrixPath& p, std::size_t samples) {
  if (samples < 2) samples = 2;
  double len = 0.0;
  CMatrix prev = p.at(0.0);
  for (std::size_t i = 1; i < samples; ++i) {
    CMatrix cur = p.at(static_cast<double>(i) / static_cast<double>(samples - 1));
    len += op_distance(cur, prev);
    prev = std::move(cur);
  }
  return len;
}

double path_curvature(const MatrixPath& p, double t, double h) {
  if (p.empty()) throw InputError("path_curvature: empty path");
  if (!(h > 0.0)) throw InputError("path_curvature: step must be positive");
  const std::size_t i = p.segment_index(t);
  const double t0 = p.segment_start(i);
  const double t1 = t0 + p.segments()[i].duration();
  if (t - 2.0 * h <= t0 || t + 2.0 * h >= t1)
    throw PreconditionError("path_curvature: t is at (or too close to) a segment joint");
  if (p.segments()[i].kind() == PathSegment::Kind::Flat) return 0.0;
  auto velocity = [&](double tau) { return (1.0 / (2.0 * h)) * (p.at(tau + h) - p.at(tau - h)); };
  const CMatrix v0 = velocity(t);
  const double speed = op_norm(v0);
  if (speed <= 1e-12) return 0.0;
  const CMatrix vm = velocity(t - h);
  const CMatrix vp = velocity(t + h);
  const double sm = op_norm(vm);
  const double sp = op_norm(vp);
  if (sm <= 1e-12 || sp <= 1e-12) return 0.0;
  const CMatrix dtan = (1.0 / (2.0 * h)) * ((1.0 / sp) * vp - (1.0 / sm) * vm);
  return op_norm(dtan) / speed;
}

const char* to_string(LinkMode m) {
  switch (m) {
    case LinkMode::Normal: return "normal";
    case LinkMode::Hermitian: return "hermitian";
    case LinkMode::Unitary: return "unitary";
  }
  return "normal";
}

LinkMode link_mode_from_string(const std::string& s) {
  if (s == "normal") return LinkMode::Normal;
  if (s == "hermitian") return LinkMode::Hermitian;
  if (s == "unitary") return LinkMode::Unitary;
  throw InputError("unknown mode '" + s + "'");
}

namespace {

void check_mode(const NormalTuple& t, LinkMode mode, double tol, const char* who) {
  for (const auto& m : t.mats()) {
    if (op_norm(m) > 1.0 + 1e-10) throw PreconditionError(std::string(who) + ": inputs must be contractions");
    if (mode == LinkMode::Hermitian && hermiticity_defect(m) > tol)
      throw PreconditionError(std::string(who) + ": hermitian mode needs Hermitian inputs");
    if (mode == LinkMode::Unitary && unitarity_defect(m) > tol)
      throw PreconditionError(std::string(who) + ": unitary mode needs unitary inputs");
  }
}

// Rigorous sup_t ||link(t) - y||: distance at each segment start plus its length.
double deviation_bound(const MatrixPath& p, const CMatrix& y) {
  double worst = 0.0;
  for (const auto& s : p.segments()) worst = std::max(worst, op_distance(s.start(), y) + s.length());
  return worst;
}

void finish_bundle(LinkBundle& b) {
  b.lengths.clear();
  b.epsilon_reported = 0.0;
  for (std::size_t j = 0; j < b.links.size(); ++j) {
    b.lengths.push_back(path_length(b.links[j]));
    b.epsilon_reported = std::max(b.epsilon_reported, deviation_bound(b.links[j], b.y[j]));
  }
}

}  // namespace

LinkBundle toral_links(const NormalTuple& x, const NormalTuple& y, LinkMode mode, double tol) {
  if (x.dim() != y.dim() || x.size() != y.size())
    throw PreconditionError("toral_links: tuples differ in dimension or length");
  check_mode(x, mode, tol, "toral_links");
  check_mode(y, mode, tol, "toral_links");
  const Approximant ap = isospectral_approximant(x, y);
  LinkBundle b;
  b.mode = mode;
  b.x = x.mats();
  b.y = y.mats();
  b.conjugator = gap_branch_log(ap.v);
  const HermEig heig = herm_eig(b.conjugator);
  for (std::size_t j = 0; j < x.size(); ++j) {
    MatrixPath curved(PathSegment::conj(b.conjugator, heig, x[j], 0.0, 1.0));
    const CMatrix& px = ap.psi_of_x[j];
    PathSegment second = mode == LinkMode::Unitary
                             ? PathSegment::geodesic(px, principal_log_unitary(adjoint_times(px, y[j])))
                             : PathSegment::flat(px, y[j]);
    b.links.push_back(concat(curved, MatrixPath(std::move(second))));
  }
  finish_bundle(b);
  return b;
}

ContractionPath unitary_contraction_path(const CMatrix& u, const std::vector<CMatrix>& f, double tol,
                                         std::size_t grid) {
  require_finite(u, "unitary_contraction_path");
  if (unitarity_defect(u) > tol) throw PreconditionError("unitary_contraction_path: input is not unitary");
  ContractionPath out;
  out.h = gap_branch_log(u);
  // u e^{-isH} = e^{i(1-s)H}
  out.path = MatrixPath(PathSegment::geodesic(u, -out.h));
  out.length = path_length(out.path);
  if (grid < 2) grid = 2;
  for (std::size_t i = 0; i < grid; ++i) {
    const CMatrix ut = out.path.at(static_cast<double>(i) / static_cast<double>(grid - 1));
    for (const auto& a : f) {
      require_same_dim(ut, a, "unitary_contraction_path");
      out.max_commutator = std::max(out.max_commutator, op_norm(commutator(ut, a)));
    }
  }
  return out;
}

MatrixPath flat_unitary_path(const CMatrix& u0, const CMatrix& u1) {
  require_same_dim(u0, u1, "flat_unitary_path");
  if (unitarity_defect(u0) > 1e-9 || unitarity_defect(u1) > 1e-9)
    throw PreconditionError("flat_unitary_path: endpoints must be unitary");
  return MatrixPath(PathSegment::geodesic(u0, principal_log_unitary(adjoint_times(u0, u1))));
}

CMatrix nearby_generator(const NormalTuple& x, std::size_t j, double eps) {
  if (j >= x.size()) throw InputError("nearby_generator: index out of range");
  if (!(eps > 0.0)) throw InputError("nearby_generator: eps must be positive");
  const JointSpectrum js = joint_diagonalize(x);
  const std::size_t n = x.dim();
  double scale = 1.0;
  for (const auto& row : js.points)
    for (const auto& z : row) scale = std::max(scale, std::abs(z));
  const double same = 1e-9 * scale;
  auto close = [same](cplx a, cplx b) { return std::abs(a - b) <= same; };
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k + 1; l < n; ++l) {
      bool equal = true;
      for (std::size_t m = 0; m < x.size() && equal; ++m) equal = close(js.points[k][m], js.points[l][m]);
      if (equal) throw PreconditionError("tuple not singly generated at this tolerance");
    }
  const double eta = eps / static_cast<double>(n);
  if (eta <= 2.0 * same) throw PreconditionError("nearby_generator: eps too small to separate collisions");
  std::vector<cplx> d(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx base = js.points[k][j];
    for (std::size_t m = 0; m < n; ++m) {
      const cplx cand = base + static_cast<double>(m) * eta;
      bool clash = false;
      for (std::size_t l = 0; l < k && !clash; ++l) clash = std::abs(d[l] - cand) <= same;
      for (std::size_t l = k + 1; l < n && !clash; ++l) clash = m > 0 && close(js.points[l][j], cand);
      if (!clash) {
        d[k] = cand;
        break;
      }
      if (m + 1 == n) throw PreconditionError("tuple not singly generated at this tolerance");
    }
  }
  return from_eigen(js.q, d);
}

LinkBundle ujc_links(const NormalTuple& x, const NormalTuple& y, const CMatrix& w, const CMatrix& what) {
  if (x.dim() != y.dim() || x.size() != y.size() || w.dim() != x.dim() || what.dim() != x.dim())
    throw PreconditionError("ujc_links: dimension mismatch");
  if (unitarity_defect(w) > 1e-9 || unitarity_defect(what) > 1e-9)
    throw PreconditionError("ujc_links: W and What must be unitary");
  if (op_distance(w, what) >= 1.0) throw PreconditionError("ujc_links: ||W - What|| must be below 1");
  const CMatrix z = adjoint_times(what, w);
  LinkBundle b;
  b.mode = LinkMode::Normal;
  b.x = x.mats();
  b.y = y.mats();
  // pi H_Z with e^{i pi H_Z} = Z
  b.conjugator = principal_log_unitary(z);
  const HermEig heig = herm_eig(b.conjugator);
  for (std::size_t j = 0; j < x.size(); ++j) {
    // ends at Z x_j Z*, which is W x_j W* when What commutes with it
    MatrixPath curved(PathSegment::conj(b.conjugator, heig, x[j], 0.0, -1.0));
    const CMatrix mid = curved.end();
    b.links.push_back(concat(curved, MatrixPath(PathSegment::flat(mid, y[j]))));
  }
  finish_bundle(b);
  return b;
}

Certificate certify(const LinkBundle& b, double eps, std::size_t grid_points, const CertTolerances& tol) {
  Certificate c;
  c.mode = b.mode;
  c.epsilon = eps;
  c.tolerances = tol;
  const std::size_t count = b.links.size();
  if (grid_points < 2) grid_points = 2;
  if (count == 0 || b.x.size() != count || b.y.size() != count) {
    c.failures.push_back("malformed bundle");
    return c;
  }

  double worst_lip = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const MatrixPath& p = b.links[j];
    c.start_errors.push_back(op_distance(p.start(), b.x[j]));
    c.end_errors.push_back(op_distance(p.end(), b.y[j]));
    c.lengths.push_back(path_length(p));
    c.lipschitz.push_back(p.lipschitz());
    worst_lip = std::max(worst_lip, c.lipschitz.back());
  }

  std::vector<CMatrix> vals(count);
  for (std::size_t i = 0; i < grid_points; ++i) {
    Sample s;
    s.t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    for (std::size_t j = 0; j < count; ++j) {
      vals[j] = b.links[j].at(s.t);
      const CMatrix& a = vals[j];
      require_finite(a, "certify");
      const CMatrix p = adjoint_times(a, a);
      s.normality = std::max(s.normality, herm_op_norm(p - times_adjoint(a, a)));
      s.contraction_excess = std::max(s.contraction_excess, std::sqrt(herm_op_norm(p)) - 1.0);
      if (b.mode == LinkMode::Hermitian) s.structure = std::max(s.structure, hermiticity_defect(a));
      if (b.mode == LinkMode::Unitary) s.structure = std::max(s.structure, unitarity_defect(a));
      s.distance = std::max(s.distance, op_distance(vals[j], b.y[j]));
    }
    for (std::size_t j = 0; j < count; ++j)
      for (std::size_t k = j + 1; k < count; ++k)
        s.commutation = std::max(s.commutation, op_norm(commutator(vals[j], vals[k])));
    c.max_normality = std::max(c.max_normality, s.normality);
    c.max_commutation = std::max(c.max_commutation, s.commutation);
    c.max_contraction_excess = std::max(c.max_contraction_excess, s.contraction_excess);
    c.max_structure = std::max(c.max_structure, s.structure);
    c.max_distance = std::max(c.max_distance, s.distance);
    c.samples.push_back(s);
  }
  const double spacing = 1.0 / static_cast<double>(grid_points - 1);
  c.distance_bound = c.max_distance + 0.5 * spacing * worst_lip;

  for (std::size_t j = 0; j < count; ++j) {
    if (c.start_errors[j] > tol.endpoint) c.failures.push_back("start endpoint of link " + std::to_string(j + 1));
    if (c.end_errors[j] > tol.endpoint) c.failures.push_back("end endpoint of link " + std::to_string(j + 1));
  }
  if (c.max_normality > tol.normality) c.failures.push_back("normality defect");
  if (c.max_commutation > tol.commutation) c.failures.push_back("commutation defect");
  if (c.max_contraction_excess > tol.contraction) c.failures.push_back("contraction excess");
  if (c.max_structure > tol.structure)
    c.failures.push_back(b.mode == LinkMode::Unitary ? "unitarity defect" : "hermiticity defect");
  if (c.distance_bound > eps) c.failures.push_back("distance to target exceeds epsilon");
  c.pass = c.failures.empty();
  return c;
}

std::vector<FlowRow> project_solid_torus(const MatrixPath& p, const CMatrix& w, std::size_t samples) {
  if (p.empty()) throw InputError("project_solid_torus: empty path");
  require_same_dim(w, p.start(), "project_solid_torus");
  if (unitarity_defect(w) > 1e-9) throw PreconditionError("project_solid_torus: W must be unitary");
  if (samples < 2) samples = 2;
  std::vector<FlowRow> rows;
  rows.reserve(samples * w.dim());
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
    const CMatrix m = times_adjoint(w * p.at(t), w);
    const cplx angle = std::polar(1.0, 2.0 * std::numbers::pi * t);
    for (std::size_t k = 0; k < m.dim(); ++k) rows.push_back({t, k + 1, m(k, k), angle});
  }
  return rows;
}

}  // namespace toral
