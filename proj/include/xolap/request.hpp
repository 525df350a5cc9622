#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xolap/model.hpp"
#include "xolap/ops.hpp"
#include "xolap/oracle.hpp"

namespace xolap {

/// Flat operation request shared by the CLI flags and the HTTP body.
///
/// Keys: `op` plus any of `dimension`, `level`, `agg`, `perm`, `member`,
/// `where` (`D=V`) and `measure`. Every key maps to a list of strings.
struct OpRequest {
  std::string op;
  std::map<std::string, std::vector<std::string>> params;

  OpRequest& set(const std::string& key, std::string value);
  OpRequest& add(const std::string& key, std::string value);
  std::optional<std::string> get(std::string_view key) const;
  std::vector<std::string> all(std::string_view key) const;

  /// Scalars stay strings; repeated keys become arrays.
  nlohmann::ordered_json to_json() const;
  /// Throws Error(Usage) on non-object bodies or non-string values.
  static OpRequest from_json(const nlohmann::json& body);

  bool operator==(const OpRequest&) const = default;
};

inline const std::vector<std::string>& operator_names() {
  static const std::vector<std::string> names{"rotate", "switch", "push", "pull", "slice",
                                              "dice", "rollup", "drilldown", "cube"};
  return names;
}

/// Parses a fact document and binds the given hierarchy documents to it.
XolapCube load_cube(std::string_view facts_xml, const std::vector<std::string>& hierarchy_xml);

/// Either a cube or a cube lattice, plus its canonical XML rendering.
struct ApplyResult {
  std::optional<XolapCube> cube;
  std::optional<ops::CubeLattice> lattice;
  std::string xml;
  std::vector<std::string> warnings;
};

/// Runs one request on `current`. `base` is C0 for drill-down and may be null
/// otherwise. Parameter problems throw Error(Usage).
ApplyResult apply_request(const XolapCube& current, const XolapCube* base, const OpRequest& req);

/// Same request evaluated relationally.
oracle::Relation oracle_apply(const XolapCube& current, const XolapCube* base, const OpRequest& req);

/// Compares the engine result with the relational evaluation under the
/// operator's comparison mode.
oracle::Diff oracle_check(const XolapCube& current, const XolapCube* base, const OpRequest& req,
                          const ApplyResult& result);

}  // namespace xolap
