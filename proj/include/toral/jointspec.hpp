#pragma once

#include <cstdint>
#include <vector>

#include "toral/matcore.hpp"

namespace toral {

// N pairwise commuting normal matrices of a common dimension.
class NormalTuple {
 public:
  struct Options {
    double commutation_tol = 1e-8;
    double normality_tol = 1e-8;
    bool contractions = false;
  };

  NormalTuple() = default;
  // Validates the invariants; throws PreconditionError on violation.
  explicit NormalTuple(std::vector<CMatrix> mats) : NormalTuple(std::move(mats), Options{}) {}
  NormalTuple(std::vector<CMatrix> mats, Options opts);

  std::size_t dim() const noexcept { return mats_.empty() ? 0 : mats_.front().dim(); }
  std::size_t size() const noexcept { return mats_.size(); }
  const CMatrix& operator[](std::size_t j) const { return mats_[j]; }
  const std::vector<CMatrix>& mats() const noexcept { return mats_; }
  const Options& options() const noexcept { return opts_; }

  // Measured worst defects.
  double commutation_defect() const noexcept { return commutation_defect_; }
  double normality_defect() const noexcept { return normality_defect_; }

 private:
  std::vector<CMatrix> mats_;
  Options opts_;
  double commutation_defect_ = 0.0;
  double normality_defect_ = 0.0;
};

struct JointSpectrum {
  CMatrix q;                             // unitary joint diagonalizer
  std::vector<std::vector<cplx>> points;  // points[k][j] = Lambda^(k)(X_j)
  double residual = 0.0;                 // max_j ||Q* X_j Q - diag||
};

// Hermitian partition (X_11..X_1N, X_21..X_2N), X_j = X_1j + i X_2j.
std::vector<CMatrix> partition(const NormalTuple& t);

JointSpectrum joint_diagonalize(const NormalTuple& t, double cluster_tol = 1e-8,
                                std::uint64_t seed = 0);

// Rows ordered lexicographically on (Re, Im) of X_1, X_2, ...
std::vector<std::vector<cplx>> joint_spectrum(const NormalTuple& t);

// Jordan-Wigner Clifford generators: Hermitian, square to one, anticommuting.
struct CliffordRep {
  std::size_t count = 0;
  std::vector<CMatrix> gens;
};

CliffordRep clifford_rep(std::size_t count);

struct CliffordNorm {
  CMatrix matrix;  // i * sum_j X_j (x) e_j with e_j = i gamma_j
  double norm = 0.0;
};

// Commutativity of the inputs is not required.
CliffordNorm clifford_norm(const std::vector<CMatrix>& mats);

}  // namespace toral
