#include "toral/spectral_match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace toral {

namespace {

constexpr double kTightTolerance = 1e-11;

using Adjacency = std::vector<std::vector<std::size_t>>;

bool kuhn_augment(std::size_t row, const Adjacency& adj, std::vector<char>& seen,
                  std::vector<std::ptrdiff_t>& match_col) {
  for (std::size_t col : adj[row]) {
    if (seen[col]) continue;
    seen[col] = 1;
    if (match_col[col] < 0 ||
        kuhn_augment(static_cast<std::size_t>(match_col[col]), adj, seen, match_col)) {
      match_col[col] = static_cast<std::ptrdiff_t>(row);
      return true;
    }
  }
  return false;
}

bool has_perfect_matching(const CostMatrix& c, double threshold) {
  const std::size_t n = c.size();
  Adjacency adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c[i][j] <= threshold) adj[i].push_back(j);
  std::vector<std::ptrdiff_t> match_col(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<char> seen(n, 0);
    if (!kuhn_augment(i, adj, seen, match_col)) return false;
  }
  return true;
}

struct HungarianResult {
  std::vector<std::size_t> row_to_col;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

// Shortest augmenting path Hungarian algorithm; reduced costs c - u - v >= 0.
HungarianResult hungarian(const CostMatrix& c) {
  const std::size_t n = c.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  HungarianResult r;
  r.row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) r.row_to_col[p[j] - 1] = j - 1;
  r.u.assign(u.begin() + 1, u.end());
  r.v.assign(v.begin() + 1, v.end());
  return r;
}

// Among the perfect matchings of the tight graph, pick the lexicographically
// smallest by fixing rows in order and rerouting along alternating paths.
std::vector<std::size_t> lexicographic_refine(const std::vector<std::vector<char>>& tight,
                                              std::vector<std::size_t> row_to_col) {
  const std::size_t n = row_to_col.size();
  std::vector<std::size_t> col_to_row(n);
  for (std::size_t r = 0; r < n; ++r) col_to_row[row_to_col[r]] = r;
  std::vector<char> fixed_col(n, 0);

  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t target = row_to_col[r];
    for (std::size_t c = 0; c < target; ++c) {
      if (!tight[r][c] || fixed_col[c]) continue;
      // r takes c; the row holding c must reach `target` along an alternating
      // path through unfixed columns.
      const std::size_t start = col_to_row[c];
      std::vector<std::size_t> parent(n, n);
      std::vector<char> seen_col(n, 0);
      std::vector<std::size_t> queue{start};
      seen_col[c] = 1;
      std::size_t end_row = n;
      for (std::size_t qi = 0; qi < queue.size() && end_row == n; ++qi) {
        const std::size_t row = queue[qi];
        for (std::size_t col = 0; col < n; ++col) {
          if (!tight[row][col] || fixed_col[col] || seen_col[col]) continue;
          if (col == target) {
            end_row = row;
            break;
          }
          seen_col[col] = 1;
          const std::size_t next = col_to_row[col];
          parent[next] = row;
          queue.push_back(next);
        }
      }
      if (end_row == n) continue;
      std::size_t cur = end_row;
      std::size_t take = target;
      while (true) {
        const std::size_t released = row_to_col[cur];
        row_to_col[cur] = take;
        col_to_row[take] = cur;
        if (cur == start) break;
        take = released;
        cur = parent[cur];
      }
      row_to_col[r] = c;
      col_to_row[c] = r;
      break;
    }
    fixed_col[row_to_col[r]] = 1;
  }
  return row_to_col;
}

Matching finish(const CostMatrix& c, std::vector<std::size_t> tau) {
  Matching m;
  m.tau = std::move(tau);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double cost = c[k][m.tau[k]];
    m.bottleneck = std::max(m.bottleneck, cost);
    m.sum_cost += cost;
  }
  return m;
}

void validate_costs(const CostMatrix& c) {
  for (const auto& row : c) {
    if (row.size() != c.size()) throw InputError("assignment: cost matrix is not square");
    for (double v : row)
      if (!std::isfinite(v) || v < 0.0) throw InputError("assignment: costs must be finite and nonnegative");
  }
}

// Min-sum assignment restricted to entries <= limit, lexicographic tie-break.
std::vector<std::size_t> restricted_min_sum(const CostMatrix& c, double limit) {
  const std::size_t n = c.size();
  double max_cost = 0.0;
  for (const auto& row : c)
    for (double v : row) max_cost = std::max(max_cost, v);
  const double forbidden = (max_cost + 1.0) * static_cast<double>(n + 1) * 4.0;
  CostMatrix w(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w[i][j] = c[i][j] <= limit ? c[i][j] : forbidden;
  const HungarianResult h = hungarian(w);
  const double tol = kTightTolerance * (1.0 + max_cost);
  std::vector<std::vector<char>> tight(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      tight[i][j] = c[i][j] <= limit && w[i][j] - h.u[i] - h.v[j] <= tol;
  return lexicographic_refine(tight, h.row_to_col);
}

}  // namespace

CostMatrix spectral_cost_matrix(const Points& lx, const Points& ly) {
  if (lx.size() != ly.size()) throw InputError("spectral_cost_matrix: spectra have different sizes");
  const std::size_t n = lx.size();
  CostMatrix c(n, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      if (lx[k].size() != ly[l].size())
        throw InputError("spectral_cost_matrix: points have different tuple lengths");
      double s = 0.0;
      for (std::size_t j = 0; j < lx[k].size(); ++j) s += std::norm(lx[k][j] - ly[l][j]);
      c[k][l] = std::sqrt(s);
    }
  }
  return c;
}

Matching bottleneck_assign(const CostMatrix& c) {
  validate_costs(c);
  const std::size_t n = c.size();
  if (n == 0) return {};
  std::vector<double> values;
  values.reserve(n * n);
  for (const auto& row : c) values.insert(values.end(), row.begin(), row.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::size_t lo = 0;
  std::size_t hi = values.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (has_perfect_matching(c, values[mid])) hi = mid;
    else lo = mid + 1;
  }
  return finish(c, restricted_min_sum(c, values[lo]));
}

Matching sum_assign(const CostMatrix& c) {
  validate_costs(c);
  if (c.empty()) return {};
  return finish(c, restricted_min_sum(c, std::numeric_limits<double>::infinity()));
}

namespace {

// Unitary polar factor of a small matrix; empty when it is (nearly) singular.
std::optional<CMatrix> polar_unitary(const CMatrix& m) {
  const HermEig eig = herm_eig(adjoint_times(m, m));
  std::vector<double> inv_sqrt(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) {
    if (eig.values[i] <= 1e-16) return std::nullopt;
    inv_sqrt[i] = 1.0 / std::sqrt(eig.values[i]);
  }
  return m * from_eigen(eig.vectors, inv_sqrt);
}

}  // namespace

Approximant isospectral_approximant(const NormalTuple& x, const NormalTuple& y,
                                    MatchObjective objective) {
  if (x.dim() != y.dim() || x.size() != y.size())
    throw PreconditionError("isospectral_approximant: tuples differ in dimension or length");
  const std::size_t n = x.dim();
  const std::size_t count = x.size();

  Approximant out;
  out.spectrum_x = joint_diagonalize(x);
  out.spectrum_y = joint_diagonalize(y);
  const CostMatrix cost = spectral_cost_matrix(out.spectrum_x.points, out.spectrum_y.points);
  out.matching = objective == MatchObjective::Bottleneck ? bottleneck_assign(cost) : sum_assign(cost);
  const auto& tau = out.matching.tau;

  // Align the free phases (and exact-degeneracy bases) of the X eigenvectors
  // with their matched Y eigenvectors so that V is as close to 1 as possible.
  CMatrix qx = out.spectrum_x.q;
  const CMatrix& qy = out.spectrum_y.q;
  double scale = 1.0;
  for (const auto& row : out.spectrum_x.points)
    for (const auto& z : row) scale = std::max(scale, std::abs(z));
  const double exact_tol = 1e-12 * scale;
  std::size_t begin = 0;
  while (begin < n) {
    std::size_t end = begin + 1;
    while (end < n) {
      double diff = 0.0;
      for (std::size_t j = 0; j < count; ++j)
        diff = std::max(diff, std::abs(out.spectrum_x.points[end][j] - out.spectrum_x.points[begin][j]));
      if (diff > exact_tol) break;
      ++end;
    }
    const std::size_t m = end - begin;
    CMatrix overlap(m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        cplx s = 0.0;
        const cplx* xa = qx.column(begin + a);
        const cplx* yb = qy.column(tau[begin + b]);
        for (std::size_t i = 0; i < n; ++i) s += std::conj(xa[i]) * yb[i];
        overlap(a, b) = s;
      }
    std::optional<CMatrix> rot;
    if (m > 1) rot = polar_unitary(overlap);
    if (!rot) {
      rot = CMatrix::identity(m);
      for (std::size_t a = 0; a < m; ++a) {
        const double mag = std::abs(overlap(a, a));
        (*rot)(a, a) = mag > 0.0 ? overlap(a, a) / mag : cplx(1.0, 0.0);
      }
    }
    std::vector<std::vector<cplx>> cols(m, std::vector<cplx>(n, cplx{}));
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t a = 0; a < m; ++a) {
        const cplx r = (*rot)(a, b);
        const cplx* xa = qx.column(begin + a);
        for (std::size_t i = 0; i < n; ++i) cols[b][i] += xa[i] * r;
      }
    for (std::size_t b = 0; b < m; ++b) std::copy(cols[b].begin(), cols[b].end(), qx.column(begin + b));
    begin = end;
  }

  // V = sum_k qx_k qy_{tau(k)}^*
  CMatrix permuted_qy(n);
  for (std::size_t k = 0; k < n; ++k)
    std::copy(qy.column(tau[k]), qy.column(tau[k]) + n, permuted_qy.column(k));
  out.v = times_adjoint(qx, permuted_qy);

  double max_delta = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    out.psi_of_x.push_back(conjugate_by(out.v, x[j]));
    out.bound = std::max(out.bound, op_distance(out.psi_of_x.back(), y[j]));
    max_delta = std::max(max_delta, op_distance(x[j], y[j]));
  }
  out.empirical_ratio =
      max_delta > 0.0 ? out.matching.bottleneck / (static_cast<double>(count) * max_delta) : 0.0;
  return out;
}

}  // namespace toral
