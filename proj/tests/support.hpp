#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include "toral/jointspec.hpp"
#include "toral/matcore.hpp"

namespace oracle {

using toral::CMatrix;
using toral::cplx;
using EMat = Eigen::MatrixXcd;

inline EMat to_eigen(const CMatrix& a) {
  EMat m(a.dim(), a.dim());
  for (std::size_t j = 0; j < a.dim(); ++j)
    for (std::size_t i = 0; i < a.dim(); ++i) m(i, j) = a(i, j);
  return m;
}

inline CMatrix from_eigen(const EMat& m) {
  CMatrix a(static_cast<std::size_t>(m.rows()));
  for (std::size_t j = 0; j < a.dim(); ++j)
    for (std::size_t i = 0; i < a.dim(); ++i) a(i, j) = m(i, j);
  return a;
}

// Largest singular value from an independent SVD.
inline double svd_norm(const CMatrix& a) {
  Eigen::BDCSVD<EMat> svd(to_eigen(a));
  return svd.singularValues()(0);
}

inline std::vector<double> herm_values(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<EMat> es(to_eigen(a));
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return v;
}

inline std::vector<cplx> eigenvalues(const CMatrix& a) {
  Eigen::ComplexEigenSolver<EMat> es(to_eigen(a));
  std::vector<cplx> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return v;
}

// Unitary e^{iH} by scaling and squaring a Taylor series.
inline CMatrix expm_i(const CMatrix& h, double theta = 1.0) {
  EMat a = cplx(0.0, theta) * to_eigen(h);
  int squarings = 0;
  double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (nrm > 0.25) {
    a /= 2.0;
    nrm /= 2.0;
    ++squarings;
  }
  EMat term = EMat::Identity(a.rows(), a.cols());
  EMat sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return from_eigen(sum);
}

inline double dist(const CMatrix& a, const CMatrix& b) { return svd_norm(a - b); }

// Triple-loop product, no BLAS.
inline CMatrix naive_product(const CMatrix& a, const CMatrix& b) {
  const std::size_t n = a.dim();
  CMatrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

// Bottleneck, then total cost, then lexicographic order over all n! permutations.
struct BruteMatch {
  std::vector<std::size_t> tau;
  double bottleneck = 0.0;
  double sum = 0.0;
};

inline BruteMatch brute_bottleneck(const std::vector<std::vector<double>>& c) {
  const std::size_t n = c.size();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  BruteMatch best;
  bool first = true;
  do {
    double b = 0.0, s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      b = std::max(b, c[k][p[k]]);
      s += c[k][p[k]];
    }
    if (first || b < best.bottleneck) {
      best = {p, b, s};
      first = false;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

inline double brute_min_sum(const std::vector<std::vector<double>>& c) {
  const std::size_t n = c.size();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += c[k][p[k]];
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

// Sorted multiset distance between two spectra (greedy on sorted order is
// exact for real spectra; for complex ones use the brute force below).
inline double multiset_distance(std::vector<cplx> a, std::vector<cplx> b) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i][j] = std::abs(a[i] - b[j]);
  if (n <= 8) return brute_bottleneck(c).bottleneck;
  // greedy nearest match; adequate for well separated spectra
  std::vector<bool> used(n, false);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = n;
    for (std::size_t j = 0; j < n; ++j)
      if (!used[j] && (arg == n || c[i][j] < c[i][arg])) arg = j;
    used[arg] = true;
    worst = std::max(worst, c[i][arg]);
  }
  return worst;
}

// X_j = Q D_j Q* with random diagonal contractions.
inline std::vector<CMatrix> commuting_tuple(std::size_t n, std::size_t count, std::mt19937_64& rng,
                                            const CMatrix& q) {
  std::uniform_real_distribution<double> r(0.0, 1.0), ang(-M_PI, M_PI);
  std::vector<CMatrix> out;
  for (std::size_t j = 0; j < count; ++j) {
    std::vector<cplx> d(n);
    for (auto& z : d) z = std::polar(std::sqrt(r(rng)), ang(rng));
    out.push_back(q * CMatrix::diagonal(d) * q.adjoint());
  }
  return out;
}

}  // namespace oracle
