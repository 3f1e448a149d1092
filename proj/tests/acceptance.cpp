#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include "support.hpp"
#include "toral/cli.hpp"
#include "toral/codec.hpp"
#include "toral/lifting.hpp"
#include "toral/ncrel.hpp"
#include "toral/softtorus.hpp"

#ifndef TORAL_CLI_PATH
#error "TORAL_CLI_PATH must name the CLI binary"
#endif

using namespace toral;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kEndpoint = 1e-9;
constexpr double kCommutation = 1e-8;
constexpr double kNormality = 1e-8;
constexpr double kContraction = 1e-9;
constexpr double kStructure = 1e-9;
constexpr double kLengthConstant = 8.0;  // per-link length <= C * delta
constexpr double kApprox = 1e-9;
constexpr double kClifford = 1e-10;
constexpr double kCliffordIdentity = 1e-8;
constexpr double kLift = 1e-10;
constexpr double kSoft = 1e-12;
constexpr double kPolygonal = 1e-3;
constexpr double kLin = 1e-9;
constexpr double kCurvature = 1e-4;
constexpr double kRel = 1e-12;
constexpr double kDisk = 1e-9;
constexpr std::size_t kGrid = 101;

// Accumulates a verdict plus the worst observed values.
struct Check {
  bool ok = true;
  std::ostringstream note;
  std::vector<std::string> failures;

  void require(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

NormalTuple contractions(const std::vector<CMatrix>& m) {
  NormalTuple::Options o;
  o.contractions = true;
  return NormalTuple(m, o);
}

Bundle make_bundle(std::size_t n, std::size_t count, double delta, std::uint64_t seed, LinkMode mode) {
  GenOptions o;
  o.n = n;
  o.count = count;
  o.delta = delta;
  o.seed = seed;
  o.mode = mode;
  o.perturbation = "generic";
  return gen(o);
}

void toral_link_suite(Check& c) {
  double worst_ratio = 0.0, worst_comm = 0.0, worst_norm = 0.0, worst_end = 0.0, worst_struct = 0.0;
  std::size_t runs = 0;
  for (LinkMode mode : {LinkMode::Normal, LinkMode::Hermitian, LinkMode::Unitary})
    for (std::size_t n : {4u, 16u, 64u})
      for (std::size_t count : {2u, 3u})
        for (double delta : {1e-3, 1e-2})
          for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Bundle b = make_bundle(n, count, delta, seed, mode);
            const LinkBundle lb = toral_links(contractions(b.x), contractions(b.y), mode);
            const Certificate cert = certify(lb, 1.0, kGrid);
            const std::string tag = std::string(to_string(mode)) + " n=" + std::to_string(n) + " N=" +
                                    std::to_string(count) + " delta=" + fmt(delta) + " seed=" + std::to_string(seed);
            for (std::size_t j = 0; j < count; ++j) {
              const double e = std::max(cert.start_errors[j], cert.end_errors[j]);
              worst_end = std::max(worst_end, e);
              c.require(e <= kEndpoint, tag + ": endpoint error " + fmt(e));
              const double ratio = b.delta > 0.0 ? lb.lengths[j] / b.delta : 0.0;
              worst_ratio = std::max(worst_ratio, ratio);
              c.require(lb.lengths[j] <= kLengthConstant * b.delta, tag + ": length ratio " + fmt(ratio));
              // independent length of the assembled path
              const double exact = path_length(lb.links[j]);
              c.require(std::abs(exact - lb.lengths[j]) <= 1e-12 + 1e-9 * exact, tag + ": length bookkeeping");
            }
            worst_comm = std::max(worst_comm, cert.max_commutation);
            worst_norm = std::max(worst_norm, cert.max_normality);
            worst_struct = std::max(worst_struct, cert.max_structure);
            c.require(cert.max_commutation <= kCommutation, tag + ": commutation " + fmt(cert.max_commutation));
            c.require(cert.max_normality <= kNormality, tag + ": normality " + fmt(cert.max_normality));
            c.require(cert.max_contraction_excess <= kContraction,
                      tag + ": contraction excess " + fmt(cert.max_contraction_excess));
            if (mode != LinkMode::Normal)
              c.require(cert.max_structure <= kStructure, tag + ": structure " + fmt(cert.max_structure));
            c.require(cert.samples.size() == kGrid, tag + ": grid size");
            ++runs;
          }
  c.note << runs << " bundles, C=" << kLengthConstant << " max length/delta=" << fmt(worst_ratio)
         << " endpoint=" << fmt(worst_end) << " comm=" << fmt(worst_comm) << " normality=" << fmt(worst_norm)
         << " structure=" << fmt(worst_struct);
}

void approximant_suite(Check& c) {
  double worst_spec = 0.0, worst_comm = 0.0, worst_slack = -INFINITY;
  std::size_t runs = 0;
  for (std::size_t n : {4u, 16u, 64u})
    for (std::size_t count : {2u, 3u})
      for (double delta : {1e-3, 1e-2})
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
          const Bundle b = make_bundle(n, count, delta, seed, LinkMode::Normal);
          const NormalTuple x = contractions(b.x), y = contractions(b.y);
          const Approximant a = isospectral_approximant(x, y);
          const std::string tag = "n=" + std::to_string(n) + " N=" + std::to_string(count) + " seed=" +
                                  std::to_string(seed);
          double bound = 0.0;
          for (std::size_t j = 0; j < count; ++j) {
            const CMatrix psi = conjugate_by(a.v, x[j]);
            c.require(oracle::dist(psi, a.psi_of_x[j]) <= 1e-12, tag + ": reported Psi(x) differs");
            const double spec = oracle::multiset_distance(oracle::eigenvalues(psi), oracle::eigenvalues(x[j]));
            worst_spec = std::max(worst_spec, spec);
            c.require(spec <= kApprox, tag + ": spectrum moved " + fmt(spec));
            for (std::size_t k = 0; k < count; ++k) {
              const double cm = oracle::svd_norm(commutator(psi, y[k]));
              worst_comm = std::max(worst_comm, cm);
              c.require(cm <= kApprox, tag + ": commutator " + fmt(cm));
            }
            bound = std::max(bound, oracle::dist(psi, y[j]));
          }
          worst_slack = std::max(worst_slack, bound - a.matching.bottleneck);
          c.require(bound <= a.matching.bottleneck + kApprox, tag + ": distance exceeds the bottleneck");
          ++runs;
        }
  c.note << runs << " pairs, spectrum=" << fmt(worst_spec) << " comm=" << fmt(worst_comm)
         << " max(dist - bottleneck)=" << fmt(worst_slack);
}

// Full brute force with the same tie-breaks: bottleneck, total cost, lexicographic.
Matching brute_assign(const CostMatrix& cost) {
  const std::size_t n = cost.size();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  Matching best;
  bool first = true;
  do {
    double b = 0.0, s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      b = std::max(b, cost[k][p[k]]);
      s += cost[k][p[k]];
    }
    if (first || b < best.bottleneck || (b == best.bottleneck && s < best.sum_cost)) {
      best.tau = p;
      best.bottleneck = b;
      best.sum_cost = s;
      first = false;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

void matching_suite(Check& c) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 7), small(0, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t ties = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = static_cast<std::size_t>(dim(rng));
    CostMatrix cost(n, std::vector<double>(n));
    // every fourth matrix has integer costs to exercise the tie-breaks
    const bool integer = rep % 4 == 3;
    ties += integer;
    for (auto& row : cost)
      for (auto& v : row) v = integer ? small(rng) : u(rng);
    const Matching got = bottleneck_assign(cost);
    const Matching want = brute_assign(cost);
    c.require(got.tau == want.tau && got.bottleneck == want.bottleneck,
              "matrix " + std::to_string(rep) + " (n=" + std::to_string(n) + ") disagrees");
  }
  c.note << "200 cost matrices, " << ties << " with integer ties";
}

void clifford_suite(Check& c) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> cnt(1, 4), dim(1, 16);
  double worst_bound = -INFINITY, worst_id = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t count = static_cast<std::size_t>(cnt(rng));
    const std::size_t n = static_cast<std::size_t>(dim(rng));
    std::vector<CMatrix> xs;
    double sum = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      xs.push_back(random_matrix(n, rng));
      sum += oracle::svd_norm(xs.back());
    }
    const double norm = clifford_norm(xs).norm;
    worst_bound = std::max(worst_bound, norm - sum);
    c.require(norm <= sum + kClifford, "bound fails at tuple " + std::to_string(rep));

    const CMatrix q = random_unitary(n, rng);
    std::normal_distribution<double> g;
    std::vector<CMatrix> hs;
    CMatrix sq = CMatrix::zeros(n);
    for (std::size_t j = 0; j < count; ++j) {
      std::vector<double> d(n);
      for (auto& v : d) v = g(rng);
      hs.push_back(q * CMatrix::diagonal(d) * q.adjoint());
      sq += oracle::naive_product(hs.back(), hs.back());
    }
    const double cn = clifford_norm(hs).norm;
    const double gap = std::abs(cn * cn - oracle::svd_norm(sq));
    worst_id = std::max(worst_id, gap);
    c.require(gap <= kCliffordIdentity, "identity fails at tuple " + std::to_string(rep) + ": " + fmt(gap));
  }
  c.note << "100 tuples, max(norm - sum)=" << fmt(worst_bound) << " identity gap=" << fmt(worst_id);
}

void lifted_suite(Check& c) {
  double worst = 0.0, worst_decay = 0.0;
  std::size_t runs = 0;
  for (std::size_t n : {4u, 16u})
    for (std::size_t count : {2u, 3u})
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Bundle b = make_bundle(n, count, 1e-3, seed, LinkMode::Normal);
        const LiftedLinks ll = lifted_links(contractions(b.x), contractions(b.y), kGrid, seed);
        const LiftReport& r = ll.report;
        const std::string tag = "n=" + std::to_string(n) + " N=" + std::to_string(count) + " seed=" +
                                std::to_string(seed);
        bool exact = r.kappa_exact;
        for (std::size_t j = 0; j < count; ++j) exact = exact && kappa_compress(ll.phi.apply(b.x[j])) == b.x[j];
        c.require(exact, tag + ": kappa(Phi(x)) != x");
        for (double v : {r.hom_product, r.hom_adjoint, r.what_hermiticity, r.what_unitarity, r.what_exp, r.decay})
          worst = std::max(worst, v);
        c.require(r.hom_product <= kLift && r.hom_adjoint <= kLift, tag + ": homomorphism defect");
        c.require(r.what_hermiticity <= kLift && r.what_unitarity <= kLift, tag + ": What not a symmetry");
        c.require(r.what_exp <= kLift, tag + ": What != exp");
        c.require(r.decay <= kLift, tag + ": decay identity " + fmt(r.decay));
        if (n == 4) {
          // decay identity against an independent exponential
          const CMatrix& s = ll.phi.what_s;
          const CMatrix h = (0.5 * pi) * (s - CMatrix::identity(2 * n));
          for (std::size_t j = 0; j < count; ++j) {
            const CMatrix a = iota2(b.y[j]);
            const double ref = oracle::svd_norm(commutator(s, a));
            for (std::size_t i = 0; i < kGrid; ++i) {
              const double t = static_cast<double>(i) / static_cast<double>(kGrid - 1);
              const double d = std::abs(oracle::svd_norm(commutator(oracle::expm_i(h, 1.0 - t), a)) -
                                        std::abs(std::cos(pi * t / 2)) * ref);
              worst_decay = std::max(worst_decay, d);
            }
          }
          c.require(worst_decay <= kLift, tag + ": oracle decay " + fmt(worst_decay));
        }
        const Certificate cert = certify(ll.bundle, 1.0, kGrid);
        c.require(cert.pass, tag + ": lifted certificate fails");
        ++runs;
      }
  c.note << runs << " lifts at delta=1e-3, worst report value=" << fmt(worst) << " oracle decay=" << fmt(worst_decay);
}


void soft_torus_suite(Check& c) {
  double worst = 0.0;
  for (std::size_t n = 1; n <= 256; ++n) {
    const ClockShift cs = clock_shift(n);
    const double comm = std::abs(op_norm(commutator(cs.omega, cs.sigma)) - 2 * std::sin(pi / static_cast<double>(n)));
    const double dft = op_norm(cs.omega - conjugate_by(cs.f, cs.sigma));
    worst = std::max({worst, comm, dft});
    c.require(comm <= kSoft, "commutator norm at n=" + std::to_string(n) + ": " + fmt(comm));
    c.require(dft <= kSoft, "DFT relation at n=" + std::to_string(n) + ": " + fmt(dft));
  }
  for (std::size_t n = 2; n <= 8; ++n) {
    const ClockShift cs = clock_shift(n);
    const AlgebraDimension d = algebra_dimension({cs.s2, cs.sigma}, 4 * n);
    c.require(d.dimension == n * n, "algebra dimension at n=" + std::to_string(n));
  }
  std::ostringstream gaps;
  for (std::size_t n : {16u, 32u, 64u}) {
    const ClockShift cs = clock_shift(n);
    const BottResult r = bott_index(cs.omega, cs.sigma);
    c.require(r.index == 1 && r.winding == 1, "Bott/winding at n=" + std::to_string(n));
    gaps << " gap(" << n << ")=" << fmt(r.gap);
  }
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ang(-pi, pi);
  for (std::size_t n : {2u, 5u, 16u, 40u}) {
    const CMatrix q = random_unitary(n, rng);
    std::vector<cplx> d1(n), d2(n);
    for (std::size_t k = 0; k < n; ++k) {
      d1[k] = std::polar(1.0, ang(rng));
      d2[k] = std::polar(1.0, ang(rng));
    }
    const BottResult r = bott_index(conjugate_by(q, CMatrix::diagonal(d1)), conjugate_by(q, CMatrix::diagonal(d2)));
    c.require(r.index == 0, "commuting pair has nonzero index at n=" + std::to_string(n));
  }
  bool refused = false;
  double gap4 = 0.0;
  try {
    const ClockShift cs = clock_shift(4);
    bott_index(cs.omega, cs.sigma);
  } catch (const IndexUndefined& e) {
    refused = e.gap() < 0.05;
    gap4 = e.gap();
  }
  c.require(refused, "gap gating did not refuse n=4");
  c.note << "n<=256 max defect=" << fmt(worst) << gaps.str() << " refused gap(4)=" << fmt(gap4);
}

void path_suite(Check& c) {
  std::mt19937_64 rng(11);
  double worst_rel = 0.0;
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep);
    const CMatrix h = random_hermitian(n, rng);
    const CMatrix base = random_matrix(n, rng);
    const MatrixPath conj(PathSegment::conj(h, base, -0.4, 0.9));
    const MatrixPath geo(PathSegment::geodesic(random_unitary(n, rng), 0.7 * h));
    const MatrixPath mixed = concat(conj, MatrixPath(PathSegment::flat(conj.end(), base)));
    for (const MatrixPath* p : {&conj, &geo, &mixed}) {
      const double exact = path_length(*p), poly = polygonal_length(*p, 1000);
      const double rel = std::abs(exact - poly) / exact;
      worst_rel = std::max(worst_rel, rel);
      c.require(rel <= kPolygonal, "polygonal length off by " + fmt(rel));
    }
  }
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Bundle b = make_bundle(16, 3, 1e-2, seed, LinkMode::Normal);
    const LinkBundle lb = toral_links(contractions(b.x), contractions(b.y));
    for (const auto& link : lb.links) {
      const double exact = path_length(link), poly = polygonal_length(link, 1000);
      const double rel = exact > 0 ? std::abs(exact - poly) / exact : 0.0;
      worst_rel = std::max(worst_rel, rel);
      c.require(rel <= kPolygonal, "polygonal length of a toral link off by " + fmt(rel));
    }
  }

  // Lin paths: clock matrices and seeded random unitaries
  double worst_excess = -INFINITY;
  std::size_t lin_fail = 0, lin_total = 0;
  std::string first_fail;
  auto lin = [&](const CMatrix& u, const std::string& tag) {
    const std::size_t n = u.dim();
    const double bound = 2 * pi - 2 * pi / static_cast<double>(n);
    const ContractionPath p = unitary_contraction_path(u, {});
    const double len = path_length(p.path);
    worst_excess = std::max(worst_excess, len - bound);
    ++lin_total;
    if (len > bound + kLin) {
      if (lin_fail++ == 0) first_fail = tag + " length " + fmt(len) + " > " + fmt(bound);
    }
    c.require(oracle::dist(p.path.start(), u) <= 1e-9 && oracle::dist(p.path.end(), CMatrix::identity(n)) <= 1e-9,
              tag + ": Lin path endpoints");
  };
  for (std::size_t n = 1; n <= 64; ++n) lin(clock_shift(n).omega, "Omega_" + std::to_string(n));
  for (std::size_t n : {2u, 4u, 8u, 16u, 64u})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::mt19937_64 r(1000 + seed);
      lin(random_unitary(n, r), "random n=" + std::to_string(n) + " seed=" + std::to_string(seed));
    }
  c.require(lin_fail == 0, std::to_string(lin_fail) + "/" + std::to_string(lin_total) +
                               " Lin paths exceed 2pi - 2pi/n, first: " + first_fail);

  const MatrixPath circle(PathSegment::geodesic(CMatrix::scalar(1.0), CMatrix::scalar(2 * pi)));
  double worst_k = 0.0;
  for (double t : {0.05, 0.3, 0.5, 0.77, 0.95}) worst_k = std::max(worst_k, std::abs(path_curvature(circle, t) - 1.0));
  c.require(worst_k <= kCurvature, "circle curvature off by " + fmt(worst_k));
  double flat_k = 0.0;
  for (double t : {0.1, 0.5, 0.9})
    flat_k = std::max(flat_k, path_curvature(MatrixPath(PathSegment::flat(random_matrix(4, rng), random_matrix(4, rng))), t));
  c.require(flat_k == 0.0, "flat curvature " + fmt(flat_k));
  c.note << "polygonal rel=" << fmt(worst_rel) << " Lin max(len - bound)=" << fmt(worst_excess) << " over "
         << lin_total << " unitaries, circle=" << fmt(worst_k) << " flat=" << fmt(flat_k);
}

const std::vector<std::string> kVars = {"u", "v", "h", "x1", "zz9"};

double random_coefficient(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<int> e(-12, 12);
  switch (kind(rng)) {
    case 0: return 0.0;
    case 1: return std::round(u(rng));
    case 2: return u(rng) * std::pow(10.0, e(rng));
    default: return u(rng);
  }
}

NCPoly random_poly(std::mt19937_64& rng, double (*coef)(std::mt19937_64&)) {
  std::uniform_int_distribution<int> terms(0, 6), len(0, 4), var(0, static_cast<int>(kVars.size()) - 1), coin(0, 1);
  NCPoly p;
  const int t = terms(rng);
  for (int k = 0; k < t; ++k) {
    Word w;
    const int l = len(rng);
    for (int i = 0; i < l; ++i) w.push_back({kVars[static_cast<std::size_t>(var(rng))], coin(rng) == 1});
    p.add_term(w, {coef(rng), coef(rng)});
  }
  return p;
}

double unit_coefficient(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(-1.0, 1.0)(rng); }

void ncrel_suite(Check& c) {
  std::mt19937_64 rng(31);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const NCPoly p = random_poly(rng, random_coefficient);
    const std::string text = print(p);
    if (!(parse_poly(text) == p) || print(parse_poly(text)) != text) ++mismatches;
  }
  c.require(mismatches == 0, std::to_string(mismatches) + " round-trip mismatches");

  std::size_t iff_checks = 0;
  for (std::size_t n = 2; n <= 64; ++n) {
    const ClockShift cs = clock_shift(n);
    const Assignment a = {{"u", cs.omega}, {"v", cs.sigma}};
    const double s = 2 * std::sin(pi / static_cast<double>(n));
    for (double delta : {0.0, s - 0.1, s - 2e-12, s - 5e-13, s, s + 1e-6, s + 0.1, 2.0}) {
      if (delta < 0.0) continue;
      const bool member = membership(a, preset("soft_torus", delta), kRel).member;
      c.require(member == (s <= delta + kRel), "soft torus iff fails at n=" + std::to_string(n) + " delta=" + fmt(delta));
      ++iff_checks;
    }
  }

  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const NCPoly p = random_poly(rng, unit_coefficient), q = random_poly(rng, unit_coefficient);
    Assignment a;
    for (const auto& v : kVars) {
      CMatrix m = random_matrix(4, rng);
      a[v] = (1.0 / op_norm(m)) * m;
    }
    const cplx z(unit_coefficient(rng), unit_coefficient(rng));
    const CMatrix ep = evaluate(p, a), eq = evaluate(q, a);
    const double d = std::max({op_norm(evaluate(p + q, a) - (ep + eq)), op_norm(evaluate(p * q, a) - ep * eq),
                               op_norm(evaluate(p.adjoint(), a) - ep.adjoint()),
                               op_norm(evaluate(z * p, a) - z * ep),
                               op_norm(evaluate(NCPoly::scalar(1.0), a) - CMatrix::identity(4))});
    worst = std::max(worst, d);
    c.require(d <= kRel, "homomorphism defect " + fmt(d));
  }
  c.note << "1000 round trips, " << iff_checks << " iff checks, homomorphism=" << fmt(worst);
}

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

// Runs every subcommand into dir; returns the produced files in order.
std::vector<fs::path> pipeline(const fs::path& dir, Check& c) {
  fs::create_directories(dir);
  const std::string cli = quote(TORAL_CLI_PATH);
  auto at = [&](const char* name) { return quote(dir / name); };
  struct Step {
    std::string args;
    const char* out;
    int expect;
  };
  const std::vector<Step> steps = {
      {"gen --n 8 --N 3 --delta 1e-2 --seed 7 --perturb generic --output " + at("gen.json"), "gen.json", 0},
      {"link --input " + at("gen.json") + " --output " + at("link.json"), "link.json", 0},
      {"certify --input " + at("link.json") + " --output " + at("cert.json"), "cert.json", 0},
      {"lift --input " + at("gen.json") + " --output " + at("lift.json"), "lift.json", 0},
      {"spectrum --input " + at("gen.json") + " --output " + at("spectrum.json"), "spectrum.json", 0},
      {"project --input " + at("link.json") + " --link 2 --output " + at("flow.csv"), "flow.csv", 0},
      {"gen --kind clock_shift --n 16 --output " + at("cs.json"), "cs.json", 0},
      {"bott --input " + at("cs.json") + " --output " + at("bott.json"), "bott.json", 0},
      {"relcheck --input " + at("cs.json") + " --preset soft_torus --delta 0.5 --output " + at("rel.json"),
       "rel.json", 0},
  };
  std::vector<fs::path> files;
  for (const auto& s : steps) {
    const int rc = shell(cli + " " + s.args + " > /dev/null 2>&1");
    c.require(rc == s.expect, "'" + s.args.substr(0, s.args.find(' ')) + "' exited " + std::to_string(rc));
    files.push_back(dir / s.out);
  }
  return files;
}

void reproducibility_suite(Check& c) {
  const fs::path root = fs::temp_directory_path() / ("toral_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const auto a = pipeline(root / "a", c);
  const auto b = pipeline(root / "b", c);
  std::size_t identical = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool same = fs::exists(a[i]) && fs::exists(b[i]) && read_file(a[i].string()) == read_file(b[i].string());
    identical += same;
    c.require(same, a[i].filename().string() + " differs between runs");
  }

  // 3x3 example: u = e^{(2 pi i / 3) f(N_3)}, f(x) = x / 3, target W u W*
  const fs::path u3 = root / "u3";
  fs::create_directories(u3);
  std::mt19937_64 rng(3);
  const CMatrix w = random_unitary(3, rng);
  std::vector<cplx> d;
  for (double k : {3.0, 2.0, 1.0}) d.push_back(std::polar(1.0, 2 * pi / 3 * (k / 3)));
  Bundle bu;
  bu.kind = "unitary_3x3";
  bu.mode = LinkMode::Unitary;
  bu.perturbation = "conjugation";
  bu.n = 3;
  bu.count = 1;
  bu.x = {CMatrix::diagonal(d)};
  bu.y = {conjugate_by(w.adjoint(), bu.x[0])};
  bu.delta = measured_delta(bu.x, bu.y);
  bu.delta_requested = bu.delta;
  write_file_atomic((u3 / "bundle.json").string(), dump(bundle_to_json(bu)));
  write_file_atomic((u3 / "w.json").string(), dump(matrix_to_json(w)));
  const std::string cli = quote(TORAL_CLI_PATH);
  const int rc_link = shell(cli + " link --mode unitary --epsilon 2 --input " + quote(u3 / "bundle.json") +
                            " --output " + quote(u3 / "link.json") + " > /dev/null 2>&1");
  c.require(rc_link == 0, "3x3 link exited " + std::to_string(rc_link));
  const int rc_proj = shell(cli + " project --input " + quote(u3 / "link.json") + " --w " + quote(u3 / "w.json") +
                            " --output " + quote(u3 / "flow.csv") + " > /dev/null 2>&1");
  c.require(rc_proj == 0, "3x3 project exited " + std::to_string(rc_proj));
  std::size_t rows = 0;
  double worst = 0.0;
  if (rc_proj == 0) {
    std::istringstream in(read_file((u3 / "flow.csv").string()));
    std::string line;
    std::getline(in, line);
    c.require(line == "t,k,re,im,angle_re,angle_im", "3x3 CSV header");
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string cell;
      std::vector<double> v;
      while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
      c.require(v.size() == 6, "3x3 CSV row width");
      if (v.size() != 6) break;
      worst = std::max(worst, std::hypot(v[2], v[3]));
      ++rows;
    }
  }
  c.require(rows == 3 * kGrid, "3x3 CSV has " + std::to_string(rows) + " rows");
  c.require(worst <= 1.0 + kDisk, "3x3 |d_k| reaches " + fmt(worst));
  fs::remove_all(root);
  c.note << identical << "/" << a.size() << " artifacts identical, 3x3 rows=" << rows << " max|d|=" << fmt(worst);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
      {"toral link suite", toral_link_suite},
      {"isospectral approximant", approximant_suite},
      {"matching oracle", matching_suite},
      {"Clifford bound", clifford_suite},
      {"lifted suite", lifted_suite},
      {"soft torus", soft_torus_suite},
      {"path functionals", path_suite},
      {"relation language", ncrel_suite},
      {"reproducibility", reproducibility_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu: %s  %s [%.1fs] %s\n", i + 1, c.ok ? "PASS" : "FAIL", criteria[i].first, secs,
                c.note.str().c_str());
    for (const auto& f : c.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    failed += !c.ok;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
