#include "toral/cli.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "CLI11.hpp"

namespace toral {

namespace {

cplx random_disk_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
}

// Diagonal entries of a random contraction of the requested kind.
std::vector<cplx> random_diagonal(std::size_t n, LinkMode mode, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> d(n);
  for (auto& z : d) {
    switch (mode) {
      case LinkMode::Normal: z = random_disk_point(rng); break;
      case LinkMode::Hermitian: z = 2.0 * u(rng) - 1.0; break;
      case LinkMode::Unitary: z = std::polar(1.0, 2.0 * std::numbers::pi * u(rng)); break;
    }
  }
  return d;
}

// Moves each entry by at most budget, staying in the same class.
std::vector<cplx> perturb_diagonal(std::vector<cplx> d, double budget, LinkMode mode, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& z : d) {
    switch (mode) {
      case LinkMode::Normal: {
        z += budget * random_disk_point(rng);
        if (std::abs(z) > 1.0) z /= std::abs(z);
        break;
      }
      case LinkMode::Hermitian:
        z = std::clamp(z.real() + budget * u(rng), -1.0, 1.0);
        break;
      case LinkMode::Unitary: {
        const double max_angle = 2.0 * std::asin(std::min(1.0, 0.5 * budget));
        z *= std::polar(1.0, max_angle * u(rng));
        break;
      }
    }
  }
  return d;
}

}  // namespace

Bundle gen(const GenOptions& o) {
  if (o.n < 1) throw InputError("gen: n must be positive");
  if (!(o.delta >= 0.0) || !std::isfinite(o.delta)) throw InputError("gen: delta must be finite and nonnegative");
  if (o.perturbation != "within" && o.perturbation != "generic")
    throw InputError("gen: perturbation must be 'within' or 'generic'");
  Bundle b;
  b.kind = o.kind;
  b.mode = o.mode;
  b.perturbation = o.perturbation;
  b.seed = o.seed;
  b.n = o.n;
  b.delta_requested = o.delta;
  std::mt19937_64 rng(o.seed);

  if (o.kind == "commuting_pair") {
    if (o.count < 1) throw InputError("gen: N must be positive");
    const CMatrix q = random_unitary(o.n, rng);
    CMatrix q2 = q;
    const bool generic = o.perturbation == "generic";
    const double noise = generic ? 0.5 * o.delta : o.delta;
    if (generic && o.delta > 0.0) {
      // ||Ad[e^{i theta K}](A) - A|| <= 2 theta ||K|| ||A|| = delta/4
      CMatrix k = random_hermitian(o.n, rng);
      k *= 1.0 / std::max(op_norm(k), 1e-300);
      q2 = exp_i_herm(k, o.delta / 8.0) * q;
    }
    for (std::size_t j = 0; j < o.count; ++j) {
      const std::vector<cplx> d = random_diagonal(o.n, o.mode, rng);
      b.x.push_back(from_eigen(q, d));
      if (o.delta == 0.0) {
        b.y.push_back(b.x.back());
      } else {
        b.y.push_back(from_eigen(q2, perturb_diagonal(d, noise, o.mode, rng)));
      }
    }
  } else if (o.kind == "clock_shift") {
    const ClockShift cs = clock_shift(o.n);
    b.x = {cs.omega, cs.sigma};
    b.y = b.x;
  } else if (o.kind == "soft_pair") {
    const SoftPair sp = soft_pair(o.n, o.delta);
    b.x = {sp.u, sp.v};
    b.y = b.x;
  } else {
    throw InputError("gen: unknown kind '" + o.kind + "'");
  }
  b.count = b.x.size();
  b.delta = measured_delta(b.x, b.y);
  return b;
}

namespace {

struct Common {
  std::string input, output, relations, preset, w_path, kind = "commuting_pair", mode = "normal",
                                                        perturb = "within", objective = "bottleneck";
  double epsilon = 1.0, delta = 1e-3, tol = 1e-9;
  std::size_t grid = 101, n = 4, count = 2, link = 1;
  std::uint64_t seed = 0;
};

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) out << text;
  else write_file_atomic(c.output, text);
}

Bundle load_bundle(const std::string& path) {
  if (path.empty()) throw InputError("--input is required");
  return bundle_from_json(parse_json_text(read_file(path), path));
}

std::pair<NormalTuple, NormalTuple> tuples(const Bundle& b) {
  NormalTuple::Options opts;
  opts.contractions = true;
  return {NormalTuple(b.x, opts), NormalTuple(b.y, opts)};
}

int cmd_gen(const Common& c, std::ostream& out) {
  GenOptions o;
  o.kind = c.kind;
  o.n = c.n;
  o.count = c.count;
  o.delta = c.delta;
  o.seed = c.seed;
  o.mode = link_mode_from_string(c.mode);
  o.perturbation = c.perturb;
  emit(c, dump(bundle_to_json(gen(o))), out);
  return kExitOk;
}

int cmd_link(const Common& c, std::ostream& out) {
  const Bundle b = load_bundle(c.input);
  const auto [x, y] = tuples(b);
  const LinkBundle lb = toral_links(x, y, link_mode_from_string(c.mode), c.tol);
  const Certificate cert = certify(lb, c.epsilon, c.grid);
  emit(c, dump(json{{"bundle", link_bundle_to_json(lb)}, {"certificate", certificate_to_json(cert)}}), out);
  return cert.pass ? kExitOk : kExitFailed;
}

int cmd_lift(const Common& c, std::ostream& out) {
  const Bundle b = load_bundle(c.input);
  const auto [x, y] = tuples(b);
  const LiftedLinks ll = lifted_links(x, y, c.grid, c.seed);
  const Certificate cert = certify(ll.bundle, c.epsilon, c.grid);
  const LiftReport& r = ll.report;
  const bool ok = cert.pass && r.kappa_exact && r.hom_product <= 1e-10 && r.hom_adjoint <= 1e-10 &&
                  r.what_hermiticity <= 1e-10 && r.what_unitarity <= 1e-10 && r.what_exp <= 1e-10 &&
                  r.decay <= 1e-10;
  emit(c,
       dump(json{{"what_s", matrix_to_json(ll.phi.what_s)},
                 {"report", lift_report_to_json(r)},
                 {"bundle", link_bundle_to_json(ll.bundle)},
                 {"certificate", certificate_to_json(cert)}}),
       out);
  return ok ? kExitOk : kExitFailed;
}

LinkBundle load_links(const std::string& path) {
  if (path.empty()) throw InputError("--input is required");
  const json j = parse_json_text(read_file(path), path);
  if (j.is_object() && j.contains("bundle")) return link_bundle_from_json(j.at("bundle"), "/bundle");
  return link_bundle_from_json(j, "");
}

int cmd_certify(const Common& c, std::ostream& out) {
  const LinkBundle lb = load_links(c.input);
  const Certificate cert = certify(lb, c.epsilon, c.grid);
  emit(c, dump(certificate_to_json(cert)), out);
  return cert.pass ? kExitOk : kExitFailed;
}

int cmd_bott(const Common& c, std::ostream& out) {
  CMatrix u, v;
  if (!c.input.empty()) {
    const Bundle b = load_bundle(c.input);
    if (b.x.size() < 2) throw PreconditionError("bott: the bundle needs two matrices in X");
    u = b.x[0];
    v = b.x[1];
  } else {
    const ClockShift cs = clock_shift(c.n);
    u = cs.omega;
    v = cs.sigma;
  }
  const BottResult r = bott_index(u, v, c.tol);
  emit(c, dump(bott_to_json(r)), out);
  return r.index == r.winding ? kExitOk : kExitFailed;
}

int cmd_relcheck(const Common& c, std::ostream& out) {
  RelationSet rs;
  if (!c.relations.empty()) rs = parse_relations(read_file(c.relations));
  else if (!c.preset.empty()) rs = preset(c.preset, c.delta);
  else throw InputError("relcheck: give --relations or --preset");
  const Bundle b = load_bundle(c.input);
  const std::vector<std::string> vars = rs.variables();
  if (vars.size() > b.x.size())
    throw PreconditionError("relcheck: relations use more variables than the bundle provides");
  Assignment assign;
  for (std::size_t i = 0; i < vars.size(); ++i) assign.emplace(vars[i], b.x[i]);
  const MembershipReport r = membership(assign, rs, c.tol);
  emit(c, dump(membership_to_json(rs, r)), out);
  return r.member ? kExitOk : kExitFailed;
}

int cmd_project(const Common& c, std::ostream& out) {
  const LinkBundle lb = load_links(c.input);
  if (c.link < 1 || c.link > lb.links.size()) throw InputError("project: --link out of range");
  const MatrixPath& p = lb.links[c.link - 1];
  CMatrix w = CMatrix::identity(p.dim());
  if (!c.w_path.empty()) w = matrix_from_json(parse_json_text(read_file(c.w_path), c.w_path), "");
  const std::vector<FlowRow> rows = project_solid_torus(p, w, c.grid);
  emit(c, flow_csv(rows), out);
  for (const auto& r : rows)
    if (std::abs(r.d) > 1.0 + 1e-9) return kExitFailed;
  return kExitOk;
}

int cmd_spectrum(const Common& c, std::ostream& out) {
  const Bundle b = load_bundle(c.input);
  const auto [x, y] = tuples(b);
  const MatchObjective obj = c.objective == "sum" ? MatchObjective::Sum : MatchObjective::Bottleneck;
  const Approximant ap = isospectral_approximant(x, y, obj);
  emit(c,
       dump(json{{"objective", c.objective},
                 {"X", points_to_json(ap.spectrum_x.points)},
                 {"Y", points_to_json(ap.spectrum_y.points)},
                 {"tau", ap.matching.tau},
                 {"bottleneck", ap.matching.bottleneck},
                 {"sum_cost", ap.matching.sum_cost},
                 {"approximant_bound", ap.bound},
                 {"empirical_ratio", ap.empirical_ratio}}),
       out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"toral: commuting matrix homotopies and their certificates"};
  app.require_subcommand(1);
  Common c;

  auto add_io = [&](CLI::App* s) {
    s->add_option("--input", c.input, "input JSON");
    s->add_option("--output", c.output, "output file (stdout when omitted)");
  };
  auto* gen_cmd = app.add_subcommand("gen", "generate a test bundle");
  gen_cmd->add_option("--output", c.output, "output file");
  gen_cmd->add_option("--kind", c.kind)->check(CLI::IsMember({"commuting_pair", "clock_shift", "soft_pair"}));
  gen_cmd->add_option("--n", c.n);
  gen_cmd->add_option("--N", c.count);
  gen_cmd->add_option("--delta", c.delta);
  gen_cmd->add_option("--seed", c.seed);
  gen_cmd->add_option("--mode", c.mode)->check(CLI::IsMember({"normal", "hermitian", "unitary"}));
  gen_cmd->add_option("--perturb", c.perturb)->check(CLI::IsMember({"within", "generic"}));

  auto* link_cmd = app.add_subcommand("link", "build toral links and certify them");
  add_io(link_cmd);
  link_cmd->add_option("--mode", c.mode)->check(CLI::IsMember({"normal", "hermitian", "unitary"}));
  link_cmd->add_option("--epsilon", c.epsilon);
  link_cmd->add_option("--grid", c.grid);
  link_cmd->add_option("--tol", c.tol);

  auto* lift_cmd = app.add_subcommand("lift", "build lifted links in twice the dimension");
  add_io(lift_cmd);
  lift_cmd->add_option("--epsilon", c.epsilon);
  lift_cmd->add_option("--grid", c.grid);
  lift_cmd->add_option("--seed", c.seed);

  auto* cert_cmd = app.add_subcommand("certify", "re-certify a stored link bundle");
  add_io(cert_cmd);
  cert_cmd->add_option("--epsilon", c.epsilon);
  cert_cmd->add_option("--grid", c.grid);

  auto* bott_cmd = app.add_subcommand("bott", "Bott index of the first two matrices of a bundle");
  add_io(bott_cmd);
  bott_cmd->add_option("--n", c.n, "clock/shift size when no input is given");
  bott_cmd->add_option("--tol", c.tol, "spectral gap threshold")->default_val(0.05);

  auto* rel_cmd = app.add_subcommand("relcheck", "check relations on the X tuple of a bundle");
  add_io(rel_cmd);
  rel_cmd->add_option("--relations", c.relations, "relation file");
  rel_cmd->add_option("--preset", c.preset)->check(CLI::IsMember(preset_names()));
  rel_cmd->add_option("--delta", c.delta, "preset parameter");
  rel_cmd->add_option("--tol", c.tol, "slack")->default_val(1e-12);

  auto* proj_cmd = app.add_subcommand("project", "solid-torus flow table of one link");
  add_io(proj_cmd);
  proj_cmd->add_option("--link", c.link, "1-based link index");
  proj_cmd->add_option("--w", c.w_path, "unitary W as matrix JSON");
  proj_cmd->add_option("--grid", c.grid, "samples");

  auto* spec_cmd = app.add_subcommand("spectrum", "joint spectra and their matching");
  add_io(spec_cmd);
  spec_cmd->add_option("--objective", c.objective)->check(CLI::IsMember({"bottleneck", "sum"}));

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }

  try {
    if (*gen_cmd) return cmd_gen(c, out);
    if (*link_cmd) return cmd_link(c, out);
    if (*lift_cmd) return cmd_lift(c, out);
    if (*cert_cmd) return cmd_certify(c, out);
    if (*bott_cmd) return cmd_bott(c, out);
    if (*rel_cmd) return cmd_relcheck(c, out);
    if (*proj_cmd) return cmd_project(c, out);
    if (*spec_cmd) return cmd_spectrum(c, out);
  } catch (const DiagnosticsError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }
  return kExitPrecondition;
}

}  // namespace toral
