#include "toral/codec.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace toral {

namespace {

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw DecodeError(path + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw DecodeError(path + "/" + key + ": missing");
  return *it;
}

double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw DecodeError(path + ": expected a number");
  return j.get<double>();
}

std::uint64_t get_uint(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw DecodeError(path + ": expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw DecodeError(path + ": expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw DecodeError(path + ": expected a boolean");
  return j.get<bool>();
}

std::vector<double> get_doubles(const json& j, const std::string& path) {
  if (!j.is_array()) throw DecodeError(path + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_double(j[i], path + "/" + std::to_string(i)));
  return out;
}

LinkMode get_mode(const json& j, const std::string& path) {
  try {
    return link_mode_from_string(get_string(j, path));
  } catch (const InputError&) {
    throw DecodeError(path + ": unknown mode");
  }
}

}  // namespace

double measured_delta(const std::vector<CMatrix>& x, const std::vector<CMatrix>& y) {
  if (x.size() != y.size()) throw InputError("measured_delta: tuple lengths differ");
  double d = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) d = std::max(d, op_distance(x[j], y[j]));
  return d;
}

json points_to_json(const std::vector<std::vector<cplx>>& pts) {
  json out = json::array();
  for (const auto& row : pts) {
    json r = json::array();
    for (const auto& z : row) r.push_back({z.real(), z.imag()});
    out.push_back(r);
  }
  return out;
}

json matrix_to_json(const CMatrix& m) {
  json re = json::array(), im = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    json rr = json::array(), ir = json::array();
    for (std::size_t k = 0; k < m.dim(); ++k) {
      rr.push_back(m(i, k).real());
      ir.push_back(m(i, k).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ir));
  }
  return json{{"n", m.dim()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

CMatrix matrix_from_json(const json& j, const std::string& path) {
  const std::size_t n = get_uint(field(j, "n", path), path + "/n");
  if (n == 0) throw DecodeError(path + "/n: dimension must be positive");
  const json& re = field(j, "re", path);
  const json& im = field(j, "im", path);
  CMatrix m(n);
  for (const auto& [part, name] : {std::pair{&re, "re"}, std::pair{&im, "im"}}) {
    const std::string p = path + "/" + name;
    if (!part->is_array() || part->size() != n) throw DecodeError(p + ": expected " + std::to_string(n) + " rows");
    for (std::size_t i = 0; i < n; ++i) {
      const json& row = (*part)[i];
      const std::string rp = p + "/" + std::to_string(i);
      if (!row.is_array() || row.size() != n) throw DecodeError(rp + ": expected " + std::to_string(n) + " entries");
      for (std::size_t k = 0; k < n; ++k) {
        const double v = get_double(row[k], rp + "/" + std::to_string(k));
        if (name[0] == 'r') m(i, k).real(v);
        else m(i, k).imag(v);
      }
    }
  }
  if (!m.all_finite()) throw DecodeError(path + ": non-finite entries");
  return m;
}

json matrices_to_json(const std::vector<CMatrix>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<CMatrix> matrices_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw DecodeError(path + ": expected an array of matrices");
  std::vector<CMatrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(matrix_from_json(j[i], path + "/" + std::to_string(i)));
  return out;
}

json bundle_to_json(const Bundle& b) {
  return json{{"kind", b.kind},
              {"mode", to_string(b.mode)},
              {"perturbation", b.perturbation},
              {"seed", b.seed},
              {"n", b.n},
              {"N", b.count},
              {"delta", b.delta},
              {"delta_requested", b.delta_requested},
              {"X", matrices_to_json(b.x)},
              {"Y", matrices_to_json(b.y)}};
}

Bundle bundle_from_json(const json& j) {
  Bundle b;
  b.kind = get_string(field(j, "kind", ""), "/kind");
  b.mode = get_mode(field(j, "mode", ""), "/mode");
  b.perturbation = get_string(field(j, "perturbation", ""), "/perturbation");
  b.seed = get_uint(field(j, "seed", ""), "/seed");
  b.n = get_uint(field(j, "n", ""), "/n");
  b.count = get_uint(field(j, "N", ""), "/N");
  b.delta = get_double(field(j, "delta", ""), "/delta");
  b.delta_requested = get_double(field(j, "delta_requested", ""), "/delta_requested");
  b.x = matrices_from_json(field(j, "X", ""), "/X");
  b.y = matrices_from_json(field(j, "Y", ""), "/Y");
  if (b.x.size() != b.count || b.y.size() != b.count) throw DecodeError("/N: tuple lengths do not match N");
  for (const auto* t : {&b.x, &b.y})
    for (const auto& m : *t)
      if (m.dim() != b.n) throw DecodeError("/n: matrix dimensions do not match n");
  const double d = measured_delta(b.x, b.y);
  if (std::abs(d - b.delta) > 1e-12) throw DecodeError("/delta: stored value does not match the tuples");
  return b;
}

json segment_to_json(const PathSegment& s) {
  switch (s.kind()) {
    case PathSegment::Kind::Flat:
      return json{{"kind", "flat"}, {"duration", s.duration()}, {"a", matrix_to_json(s.first())},
                  {"b", matrix_to_json(s.second())}};
    case PathSegment::Kind::Conj:
      return json{{"kind", "conj"}, {"duration", s.duration()}, {"h", matrix_to_json(s.second())},
                  {"base", matrix_to_json(s.first())}, {"theta0", s.theta0()}, {"theta1", s.theta1()}};
    case PathSegment::Kind::Geodesic:
      return json{{"kind", "geodesic"}, {"duration", s.duration()}, {"base", matrix_to_json(s.first())},
                  {"k", matrix_to_json(s.second())}};
  }
  return {};
}

PathSegment segment_from_json(const json& j, const std::string& path) {
  const std::string kind = get_string(field(j, "kind", path), path + "/kind");
  const double duration = get_double(field(j, "duration", path), path + "/duration");
  if (!(duration > 0.0)) throw DecodeError(path + "/duration: must be positive");
  try {
    if (kind == "flat")
      return PathSegment::flat(matrix_from_json(field(j, "a", path), path + "/a"),
                               matrix_from_json(field(j, "b", path), path + "/b"), duration);
    if (kind == "conj")
      return PathSegment::conj(matrix_from_json(field(j, "h", path), path + "/h"),
                               matrix_from_json(field(j, "base", path), path + "/base"),
                               get_double(field(j, "theta0", path), path + "/theta0"),
                               get_double(field(j, "theta1", path), path + "/theta1"), duration);
    if (kind == "geodesic")
      return PathSegment::geodesic(matrix_from_json(field(j, "base", path), path + "/base"),
                                   matrix_from_json(field(j, "k", path), path + "/k"), duration);
  } catch (const DecodeError&) {
    throw;
  } catch (const Error& e) {
    throw DecodeError(path + ": " + e.what());
  }
  throw DecodeError(path + "/kind: unknown segment kind '" + kind + "'");
}

json path_to_json(const MatrixPath& p) {
  json out = json::array();
  for (const auto& s : p.segments()) out.push_back(segment_to_json(s));
  return out;
}

MatrixPath path_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw DecodeError(path + ": expected a nonempty array of segments");
  std::vector<PathSegment> segs;
  for (std::size_t i = 0; i < j.size(); ++i) segs.push_back(segment_from_json(j[i], path + "/" + std::to_string(i)));
  try {
    return MatrixPath::from_segments(std::move(segs));
  } catch (const Error& e) {
    throw DecodeError(path + ": " + e.what());
  }
}

json link_bundle_to_json(const LinkBundle& b) {
  json links = json::array();
  for (const auto& p : b.links) links.push_back(path_to_json(p));
  return json{{"mode", to_string(b.mode)},
              {"epsilon_reported", b.epsilon_reported},
              {"lengths", b.lengths},
              {"conjugator", b.conjugator.empty() ? json(nullptr) : matrix_to_json(b.conjugator)},
              {"X", matrices_to_json(b.x)},
              {"Y", matrices_to_json(b.y)},
              {"links", links}};
}

LinkBundle link_bundle_from_json(const json& j, const std::string& path) {
  LinkBundle b;
  b.mode = get_mode(field(j, "mode", path), path + "/mode");
  b.epsilon_reported = get_double(field(j, "epsilon_reported", path), path + "/epsilon_reported");
  b.lengths = get_doubles(field(j, "lengths", path), path + "/lengths");
  const json& h = field(j, "conjugator", path);
  if (!h.is_null()) b.conjugator = matrix_from_json(h, path + "/conjugator");
  b.x = matrices_from_json(field(j, "X", path), path + "/X");
  b.y = matrices_from_json(field(j, "Y", path), path + "/Y");
  const json& links = field(j, "links", path);
  if (!links.is_array()) throw DecodeError(path + "/links: expected an array");
  for (std::size_t i = 0; i < links.size(); ++i)
    b.links.push_back(path_from_json(links[i], path + "/links/" + std::to_string(i)));
  if (b.links.size() != b.x.size() || b.links.size() != b.y.size())
    throw DecodeError(path + "/links: counts of links and endpoints differ");
  return b;
}

json certificate_to_json(const Certificate& c) {
  json samples = json::array();
  for (const auto& s : c.samples)
    samples.push_back({{"t", s.t},
                       {"normality", s.normality},
                       {"commutation", s.commutation},
                       {"contraction_excess", s.contraction_excess},
                       {"distance", s.distance},
                       {"structure", s.structure}});
  return json{{"pass", c.pass},
              {"mode", to_string(c.mode)},
              {"epsilon", c.epsilon},
              {"tolerances",
               {{"commutation", c.tolerances.commutation},
                {"normality", c.tolerances.normality},
                {"contraction", c.tolerances.contraction},
                {"endpoint", c.tolerances.endpoint},
                {"structure", c.tolerances.structure}}},
              {"failures", c.failures},
              {"max_normality", c.max_normality},
              {"max_commutation", c.max_commutation},
              {"max_contraction_excess", c.max_contraction_excess},
              {"max_structure", c.max_structure},
              {"max_distance", c.max_distance},
              {"distance_bound", c.distance_bound},
              {"start_errors", c.start_errors},
              {"end_errors", c.end_errors},
              {"lengths", c.lengths},
              {"lipschitz", c.lipschitz},
              {"samples", samples}};
}

Certificate certificate_from_json(const json& j, const std::string& path) {
  Certificate c;
  auto num = [&](const char* key) { return get_double(field(j, key, path), path + "/" + key); };
  auto nums = [&](const char* key) { return get_doubles(field(j, key, path), path + "/" + key); };
  c.pass = get_bool(field(j, "pass", path), path + "/pass");
  c.mode = get_mode(field(j, "mode", path), path + "/mode");
  c.epsilon = num("epsilon");
  const json& tol = field(j, "tolerances", path);
  const std::string tp = path + "/tolerances";
  c.tolerances.commutation = get_double(field(tol, "commutation", tp), tp + "/commutation");
  c.tolerances.normality = get_double(field(tol, "normality", tp), tp + "/normality");
  c.tolerances.contraction = get_double(field(tol, "contraction", tp), tp + "/contraction");
  c.tolerances.endpoint = get_double(field(tol, "endpoint", tp), tp + "/endpoint");
  c.tolerances.structure = get_double(field(tol, "structure", tp), tp + "/structure");
  const json& failures = field(j, "failures", path);
  if (!failures.is_array()) throw DecodeError(path + "/failures: expected an array");
  for (std::size_t i = 0; i < failures.size(); ++i)
    c.failures.push_back(get_string(failures[i], path + "/failures/" + std::to_string(i)));
  c.max_normality = num("max_normality");
  c.max_commutation = num("max_commutation");
  c.max_contraction_excess = num("max_contraction_excess");
  c.max_structure = num("max_structure");
  c.max_distance = num("max_distance");
  c.distance_bound = num("distance_bound");
  c.start_errors = nums("start_errors");
  c.end_errors = nums("end_errors");
  c.lengths = nums("lengths");
  c.lipschitz = nums("lipschitz");
  const json& samples = field(j, "samples", path);
  if (!samples.is_array()) throw DecodeError(path + "/samples: expected an array");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string sp = path + "/samples/" + std::to_string(i);
    const json& s = samples[i];
    Sample x;
    x.t = get_double(field(s, "t", sp), sp + "/t");
    x.normality = get_double(field(s, "normality", sp), sp + "/normality");
    x.commutation = get_double(field(s, "commutation", sp), sp + "/commutation");
    x.contraction_excess = get_double(field(s, "contraction_excess", sp), sp + "/contraction_excess");
    x.distance = get_double(field(s, "distance", sp), sp + "/distance");
    x.structure = get_double(field(s, "structure", sp), sp + "/structure");
    c.samples.push_back(x);
  }
  return c;
}

json lift_report_to_json(const LiftReport& r) {
  return json{{"kappa_exact", r.kappa_exact},       {"hom_product", r.hom_product},
              {"hom_adjoint", r.hom_adjoint},       {"what_hermiticity", r.what_hermiticity},
              {"what_unitarity", r.what_unitarity}, {"what_exp", r.what_exp},
              {"decay", r.decay},                   {"phi_offset", r.phi_offset}};
}

json membership_to_json(const RelationSet& rs, const MembershipReport& r) {
  json rels = json::array();
  for (std::size_t i = 0; i < rs.relations.size(); ++i)
    rels.push_back({{"relation", print(rs.relations[i])}, {"defect", r.defects[i]}, {"pass", bool(r.passed[i])}});
  return json{{"name", rs.name ? json(*rs.name) : json(nullptr)}, {"member", r.member}, {"relations", rels}};
}

json bott_to_json(const BottResult& r) {
  return json{{"index", r.index},
              {"winding", r.winding},
              {"gap", r.gap},
              {"defect", r.defect},
              {"orientation", "index(Omega_n, Sigma_n) = +1"}};
}

std::string flow_csv(const std::vector<FlowRow>& rows) {
  std::string out = "t,k,re,im,angle_re,angle_im\n";
  for (const auto& r : rows) {
    out += format_number(r.t) + "," + std::to_string(r.k) + "," + format_number(r.d.real()) + "," +
           format_number(r.d.imag()) + "," + format_number(r.angle.real()) + "," + format_number(r.angle.imag()) +
           "\n";
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DecodeError(source + ": malformed JSON (" + e.what() + ")");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(tmp + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw Error(tmp + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(path + ": rename failed (" + ec.message() + ")");
  }
}

}  // namespace toral
