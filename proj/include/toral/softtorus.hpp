#pragma once

#include <vector>

#include "toral/matcore.hpp"

namespace toral {

struct ClockShift {
  CMatrix omega;  // e^{(2 pi i / n) N_n}
  CMatrix sigma;  // cyclic shift
  CMatrix f;      // unitary DFT with omega = f* sigma f
  CMatrix s2;     // 1 - 2 diag(1, 0, ..., 0)
  CMatrix nn;     // diag(n, n-1, ..., 1)
};

ClockShift clock_shift(std::size_t n);

struct AlgebraDimension {
  std::size_t dimension = 0;
  bool stabilized = false;  // false: max_len reached while still growing
  std::size_t word_length = 0;
};

AlgebraDimension algebra_dimension(const std::vector<CMatrix>& gens, std::size_t max_len);

struct SoftPair {
  CMatrix u, v;
  double defect = 0.0;
  std::size_t m = 0;  // clock/shift block size; 0 for the commuting fallback
};

SoftPair soft_pair(std::size_t n, double delta);

struct BottResult {
  int index = 0;
  double gap = 0.0;
  int winding = 0;
  double defect = 0.0;
};

class IndexUndefined : public PreconditionError {
 public:
  IndexUndefined(double gap, int winding, double defect)
      : PreconditionError("index undefined at this softness (spectral gap " + std::to_string(gap) + ")"),
        gap_(gap), winding_(winding), defect_(defect) {}
  double gap() const noexcept { return gap_; }
  int winding() const noexcept { return winding_; }
  double defect() const noexcept { return defect_; }

 private:
  double gap_;
  int winding_;
  double defect_;
};

// Orientation: (Omega_n, Sigma_n) has index +1.
BottResult bott_index(const CMatrix& u, const CMatrix& v, double gap_tol = 0.05);
// round((1/2 pi i) tr log(u v u* v*))
int winding_number(const CMatrix& u, const CMatrix& v);

}  // namespace toral
