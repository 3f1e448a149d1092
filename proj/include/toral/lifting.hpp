#pragma once

#include <cstdint>
#include <vector>

#include "toral/homotopy.hpp"

namespace toral {

// x (+) x
CMatrix iota2(const CMatrix& x);
// Upper-left n x n block of a 2n x 2n matrix.
CMatrix kappa_compress(const CMatrix& x);

struct LiftedHom {
  CMatrix v;       // n x n unitary
  CMatrix what_s;  // [[0, V], [V*, 0]]

  // Ad[What_s](iota2(V* x V)) = x (+) V*^2 x V^2, assembled blockwise.
  CMatrix apply(const CMatrix& x) const;
};

LiftedHom z2_dilation(const CMatrix& w);
// W (+) W, the conjugator of the standard dilation.
CMatrix std_dilation(const CMatrix& w);

struct LiftReport {
  bool kappa_exact = true;        // kappa(Phi(x_j)) == x_j bit for bit
  double hom_product = 0.0;       // max ||Phi(ab) - Phi(a)Phi(b)|| on random pairs
  double hom_adjoint = 0.0;       // max ||Phi(a*) - Phi(a)*||
  double what_hermiticity = 0.0;
  double what_unitarity = 0.0;
  double what_exp = 0.0;          // ||What_s - e^{i(pi/2)(What_s - 1)}||
  double decay = 0.0;             // worst deviation from the |cos(pi t/2)| identity
  std::vector<double> phi_offset; // ||Phi(x_j) - iota2(x_j)||
};

struct LiftedLinks {
  LiftedHom phi;
  LinkBundle bundle;  // in M_{2n}, from Phi(x_j) to iota2(y_j)
  LiftReport report;
};

LiftedLinks lifted_links(const NormalTuple& x, const NormalTuple& y, std::size_t grid = 101,
                         std::uint64_t seed = 0, std::size_t hom_samples = 10);

}  // namespace toral
