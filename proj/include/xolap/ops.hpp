#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xolap/model.hpp"
#include "xolap/tax.hpp"

/// OLAP operators, each evaluated as a composition of tree-algebra operators.
namespace xolap::ops {

using tax::AggFunction;

struct OpResult {
  XolapCube cube;
  tax::OperatorReport report;
};

/// Result of the cube operator: one `cube` tree of labeled `cuboid` nodes.
struct CubeLattice {
  CubeSchema schema;  ///< schema after the inner roll-ups
  TreeCollection data;
  tax::OperatorReport report;
};

struct DimensionPermutation {
  std::vector<std::string> order;
};

struct MemberSwap {
  std::string dimension;
  std::string first;
  std::string second;
};

/// Disjunction over members of one dimension.
struct SlicePredicate {
  std::string dimension;
  std::vector<std::string> members;
};

/// Conjunction over dimensions of member-set membership.
struct DicePredicate {
  std::vector<std::pair<std::string, std::vector<std::string>>> ranges;
};

struct RollupRequest {
  std::string dimension;
  std::string level;
  AggFunction agg = AggFunction::Sum;
};

struct DrilldownRequest {
  std::string dimension;
  std::string level;
  AggFunction agg = AggFunction::Sum;
};

OpResult rotate(const XolapCube& c, const DimensionPermutation& perm);
/// Among facts whose member is `first` or `second`, the order of maximal
/// same-member runs is reversed; other facts keep their positions.
OpResult switch_members(const XolapCube& c, const MemberSwap& swap);
OpResult push(const XolapCube& c, std::string_view dimension);
OpResult pull(const XolapCube& c, std::string_view measure);
OpResult slice(const XolapCube& c, const SlicePredicate& pred);
OpResult dice(const XolapCube& c, const DicePredicate& pred);
OpResult roll_up(const XolapCube& c, const RollupRequest& req);
/// `base` is the finest-granularity cube C0 the coarse cube was derived from.
OpResult drill_down(const XolapCube& c, const XolapCube& base, const DrilldownRequest& req);
/// Supports sum, count, min and max.
CubeLattice cube(const XolapCube& c, AggFunction agg);

/// Shape check for cube results (labels, ALL markers, numeric measures).
ValidationReport validate(const CubeLattice& lattice);

/// Aggregation used when re-aggregating already aggregated values.
AggFunction reaggregation(AggFunction agg);

}  // namespace xolap::ops
