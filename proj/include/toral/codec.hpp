#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "toral/homotopy.hpp"
#include "toral/lifting.hpp"
#include "toral/ncrel.hpp"
#include "toral/softtorus.hpp"

namespace toral {

using json = nlohmann::json;

// Test-tuple pair with its generation metadata.
struct Bundle {
  std::string kind = "commuting_pair";
  LinkMode mode = LinkMode::Normal;
  std::string perturbation = "within";
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t count = 0;  // N
  double delta = 0.0;     // measured max_j ||X_j - Y_j||
  double delta_requested = 0.0;
  std::vector<CMatrix> x, y;
};

double measured_delta(const std::vector<CMatrix>& x, const std::vector<CMatrix>& y);

json matrix_to_json(const CMatrix& m);
// path names the JSON location for error messages, e.g. "/X/0".
CMatrix matrix_from_json(const json& j, const std::string& path);
json matrices_to_json(const std::vector<CMatrix>& ms);
std::vector<CMatrix> matrices_from_json(const json& j, const std::string& path);

// Joint-spectrum rows as [[re, im], ...].
json points_to_json(const std::vector<std::vector<cplx>>& pts);

json bundle_to_json(const Bundle& b);
Bundle bundle_from_json(const json& j);

json segment_to_json(const PathSegment& s);
PathSegment segment_from_json(const json& j, const std::string& path);
json path_to_json(const MatrixPath& p);
MatrixPath path_from_json(const json& j, const std::string& path);

json link_bundle_to_json(const LinkBundle& b);
LinkBundle link_bundle_from_json(const json& j, const std::string& path = "");

json certificate_to_json(const Certificate& c);
Certificate certificate_from_json(const json& j, const std::string& path = "");

json lift_report_to_json(const LiftReport& r);
json membership_to_json(const RelationSet& rs, const MembershipReport& r);
json bott_to_json(const BottResult& r);

std::string flow_csv(const std::vector<FlowRow>& rows);

// Serialized text of a JSON value as written to disk.
std::string dump(const json& j);
json parse_json_text(const std::string& text, const std::string& source);
std::string read_file(const std::string& path);
// Writes through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace toral
