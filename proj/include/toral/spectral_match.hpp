#pragma once

#include <vector>

#include "toral/jointspec.hpp"

namespace toral {

using Points = std::vector<std::vector<cplx>>;
using CostMatrix = std::vector<std::vector<double>>;

struct Matching {
  std::vector<std::size_t> tau;  // row k of the first spectrum -> row tau[k] of the second
  double bottleneck = 0.0;
  double sum_cost = 0.0;
};

enum class MatchObjective { Bottleneck, Sum };

// c(k, l) = Euclidean distance in C^N between row k of lx and row l of ly.
CostMatrix spectral_cost_matrix(const Points& lx, const Points& ly);

// Minimizes the largest matched cost; ties go to the smallest total cost and
// then to the lexicographically smallest permutation.
Matching bottleneck_assign(const CostMatrix& c);
// Plain minimum-sum assignment (Hungarian), lexicographic tie-break.
Matching sum_assign(const CostMatrix& c);

struct Approximant {
  CMatrix v;                    // Psi = Ad[V*]
  std::vector<CMatrix> psi_of_x;  // V* x_j V
  double bound = 0.0;           // max_j ||Psi(x_j) - y_j||
  Matching matching;
  JointSpectrum spectrum_x;
  JointSpectrum spectrum_y;
  // bottleneck / (N * max_j ||x_j - y_j||), logged in place of the unknown constant
  double empirical_ratio = 0.0;
};

Approximant isospectral_approximant(const NormalTuple& x, const NormalTuple& y,
                                    MatchObjective objective = MatchObjective::Bottleneck);

}  // namespace toral
