#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "toral/errors.hpp"

namespace toral {

using cplx = std::complex<double>;

// Dense square complex matrix, column-major storage.
class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(std::size_t n) : n_(n), data_(n * n) {}

  static CMatrix zeros(std::size_t n) { return CMatrix(n); }
  static CMatrix identity(std::size_t n);
  static CMatrix diagonal(std::span<const cplx> entries);
  static CMatrix diagonal(std::span<const double> entries);
  static CMatrix scalar(cplx value) {
    CMatrix m(1);
    m(0, 0) = value;
    return m;
  }

  std::size_t dim() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[j * n_ + i]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[j * n_ + i]; }

  cplx* data() noexcept { return data_.data(); }
  const cplx* data() const noexcept { return data_.data(); }
  cplx* column(std::size_t j) noexcept { return data_.data() + j * n_; }
  const cplx* column(std::size_t j) const noexcept { return data_.data() + j * n_; }

  CMatrix adjoint() const;
  cplx trace() const;
  double frobenius() const;
  bool all_finite() const;
  std::vector<cplx> diagonal_entries() const;

  CMatrix& operator+=(const CMatrix& other);
  CMatrix& operator-=(const CMatrix& other);
  CMatrix& operator*=(cplx s);

  bool operator==(const CMatrix& other) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<cplx> data_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a);
CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);
CMatrix operator*(CMatrix a, cplx s);

// A* B and A B* without forming the adjoint.
CMatrix adjoint_times(const CMatrix& a, const CMatrix& b);
CMatrix times_adjoint(const CMatrix& a, const CMatrix& b);
// Q* A Q
CMatrix conjugate_by(const CMatrix& q, const CMatrix& a);

CMatrix commutator(const CMatrix& a, const CMatrix& b);
CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix direct_sum(const CMatrix& a, const CMatrix& b);
// k x k block starting at (row, col).
CMatrix block(const CMatrix& a, std::size_t row, std::size_t col, std::size_t k);

// Largest singular value (sqrt of the top eigenvalue of A*A).
double op_norm(const CMatrix& a);
// Largest |eigenvalue| of a matrix that is Hermitian up to rounding; the
// input is symmetrized before the tridiagonal reduction.
double herm_op_norm(const CMatrix& a);
double op_distance(const CMatrix& a, const CMatrix& b);

struct HermEig {
  CMatrix vectors;             // columns are eigenvectors
  std::vector<double> values;  // ascending
};

// Cyclic Jacobi. Input must be Hermitian within 1e-10 * ||A||.
HermEig herm_eig(const CMatrix& a);

struct NormalEig {
  CMatrix vectors;
  std::vector<cplx> values;
};

// Diagonalizes a normal matrix through its commuting Hermitian parts.
NormalEig normal_eig(const CMatrix& a, double tol = 1e-10);

// e^{i theta H} for Hermitian H.
CMatrix exp_i_herm(const CMatrix& h, double theta);
// Q diag(values) Q*
CMatrix from_eigen(const CMatrix& q, std::span<const double> values);
CMatrix from_eigen(const CMatrix& q, std::span<const cplx> values);

// Hermitian H with e^{iH} = U whose spectrum avoids the midpoint of the
// widest gap of sigma(U). Ties between equally wide gaps go to the gap with
// the smallest starting angle in [0, 2pi).
CMatrix gap_branch_log(const CMatrix& u);

// Hermitian K with e^{iK} = U and sigma(K) in (-pi, pi). Throws BranchError
// when -1 is in sigma(U) within branch_tol.
CMatrix principal_log_unitary(const CMatrix& u, double branch_tol = 1e-9);

struct DefectReport {
  double normality = 0.0;
  double unitarity = 0.0;
  double hermiticity = 0.0;
  double norm = 0.0;
  double contraction_excess = 0.0;
};

DefectReport defect_report(const CMatrix& a);
double normality_defect(const CMatrix& a);
double unitarity_defect(const CMatrix& a);
double hermiticity_defect(const CMatrix& a);

struct JointHermDiag {
  CMatrix q;
  std::vector<std::vector<double>> diagonals;  // one per input part
  double residual = 0.0;                       // worst off-diagonal norm
};

// Common eigenbasis of (nearly) commuting Hermitian matrices via seeded random
// combinations, cluster splitting and recursion. Retries with fresh
// coefficients when the residual target is missed.
JointHermDiag joint_herm_diagonalize(std::span<const CMatrix> parts, double cluster_tol,
                                     double residual_target, std::uint64_t seed = 0,
                                     int retries = 5);

// Haar-like random unitary (QR of a complex Gaussian matrix).
CMatrix random_unitary(std::size_t n, std::mt19937_64& rng);
// Random Hermitian with entries of unit scale.
CMatrix random_hermitian(std::size_t n, std::mt19937_64& rng);
CMatrix random_matrix(std::size_t n, std::mt19937_64& rng);

void require_same_dim(const CMatrix& a, const CMatrix& b, const char* what);
void require_finite(const CMatrix& a, const char* what);

}  // namespace toral
