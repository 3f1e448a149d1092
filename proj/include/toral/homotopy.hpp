#pragma once

#include <memory>
#include <string>
#include <vector>

#include "toral/spectral_match.hpp"

namespace toral {

// One analytic piece of a matrix path, parametrized by local s in [0, 1].
//   Flat:     (1 - s) A + s B
//   Conj:     e^{-i theta H} base e^{i theta H}, theta affine from theta0 to theta1
//   Geodesic: base e^{i s K}                    (K Hermitian)
class PathSegment {
 public:
  enum class Kind { Flat, Conj, Geodesic };

  static PathSegment flat(CMatrix a, CMatrix b, double duration = 1.0);
  static PathSegment conj(CMatrix h, CMatrix base, double theta0, double theta1,
                          double duration = 1.0);
  // eig must be the decomposition of h.
  static PathSegment conj(CMatrix h, const HermEig& eig, CMatrix base, double theta0, double theta1,
                          double duration = 1.0);
  static PathSegment geodesic(CMatrix base, CMatrix k, double duration = 1.0);

  Kind kind() const noexcept { return kind_; }
  double duration() const noexcept { return duration_; }
  void set_duration(double d);
  std::size_t dim() const noexcept { return a_.dim(); }

  // Flat: A, B. Conj: base, H. Geodesic: base, K.
  const CMatrix& first() const noexcept { return a_; }
  const CMatrix& second() const noexcept { return b_; }
  double theta0() const noexcept { return theta0_; }
  double theta1() const noexcept { return theta1_; }

  CMatrix at(double s) const;
  CMatrix start() const { return at(0.0); }
  CMatrix end() const { return at(1.0); }
  // Exact length; the speed in s is constant for all three kinds.
  double length() const noexcept { return length_; }

 private:
  struct Eigen {
    CMatrix q;
    std::vector<double> lambda;
    CMatrix rotated;  // Conj: Q* base Q
  };

  Kind kind_ = Kind::Flat;
  CMatrix a_, b_;
  double theta0_ = 0.0, theta1_ = 0.0;
  double duration_ = 1.0;
  double length_ = 0.0;
  std::shared_ptr<const Eigen> eig_;
};

// Piecewise path on [0, 1]; segment durations sum to one.
class MatrixPath {
 public:
  MatrixPath() = default;
  explicit MatrixPath(PathSegment seg);
  static MatrixPath constant(const CMatrix& a) { return MatrixPath(PathSegment::flat(a, a)); }
  // Durations must sum to one and consecutive endpoints agree within 1e-9.
  static MatrixPath from_segments(std::vector<PathSegment> segs);

  const std::vector<PathSegment>& segments() const noexcept { return segs_; }
  std::size_t dim() const { return segs_.empty() ? 0 : segs_.front().dim(); }
  bool empty() const noexcept { return segs_.empty(); }

  CMatrix at(double t) const;
  CMatrix start() const { return segs_.front().start(); }
  CMatrix end() const { return segs_.back().end(); }
  // Start time of segment i.
  double segment_start(std::size_t i) const;
  std::size_t segment_index(double t) const;
  // Largest |dP/dt| over the segments.
  double lipschitz() const;

 private:
  friend MatrixPath concat(const MatrixPath& x, const MatrixPath& y);
  std::vector<PathSegment> segs_;
};

// X for t in [0, 1/2], Y afterwards. Endpoints must agree within 1e-9.
MatrixPath concat(const MatrixPath& x, const MatrixPath& y);

double path_length(const MatrixPath& p);
double polygonal_length(const MatrixPath& p, std::size_t samples = 1000);
double path_curvature(const MatrixPath& p, double t, double h = 1e-4);

enum class LinkMode { Normal, Hermitian, Unitary };
const char* to_string(LinkMode m);
LinkMode link_mode_from_string(const std::string& s);

struct LinkBundle {
  LinkMode mode = LinkMode::Normal;
  std::vector<CMatrix> x, y;
  std::vector<MatrixPath> links;
  CMatrix conjugator;  // shared H of the curved factors
  double epsilon_reported = 0.0;
  std::vector<double> lengths;
};

// Structure checks on the inputs use tol.
LinkBundle toral_links(const NormalTuple& x, const NormalTuple& y, LinkMode mode = LinkMode::Normal,
                       double tol = 1e-9);

struct ContractionPath {
  MatrixPath path;
  CMatrix h;
  double length = 0.0;
  double max_commutator = 0.0;  // max over the grid and F of ||[u(t), a]||
};

ContractionPath unitary_contraction_path(const CMatrix& u, const std::vector<CMatrix>& f,
                                         double tol = 1e-10, std::size_t grid = 101);
MatrixPath flat_unitary_path(const CMatrix& u0, const CMatrix& u1);

CMatrix nearby_generator(const NormalTuple& x, std::size_t j, double eps);

LinkBundle ujc_links(const NormalTuple& x, const NormalTuple& y, const CMatrix& w,
                     const CMatrix& what);

struct CertTolerances {
  double commutation = 1e-8;
  double normality = 1e-8;
  double contraction = 1e-9;
  double endpoint = 1e-9;
  double structure = 1e-9;  // hermiticity / unitarity in those modes
};

struct Sample {
  double t = 0.0;
  double normality = 0.0;
  double commutation = 0.0;
  double contraction_excess = 0.0;
  double distance = 0.0;  // max_j ||X_t^j - y_j||
  double structure = 0.0;
};

struct Certificate {
  LinkMode mode = LinkMode::Normal;
  double epsilon = 0.0;
  CertTolerances tolerances;
  std::vector<Sample> samples;
  std::vector<double> start_errors, end_errors;
  std::vector<double> lengths;
  std::vector<double> lipschitz;
  double max_normality = 0.0;
  double max_commutation = 0.0;
  double max_contraction_excess = 0.0;
  double max_structure = 0.0;
  double max_distance = 0.0;
  double distance_bound = 0.0;  // sampled max plus Lipschitz * half spacing
  std::vector<std::string> failures;
  bool pass = false;
};

Certificate certify(const LinkBundle& b, double eps, std::size_t grid_points = 101,
                    const CertTolerances& tol = {});

struct FlowRow {
  double t;
  std::size_t k;  // 1-based
  cplx d;
  cplx angle;
};

std::vector<FlowRow> project_solid_torus(const MatrixPath& p, const CMatrix& w, std::size_t samples);

}  // namespace toral
