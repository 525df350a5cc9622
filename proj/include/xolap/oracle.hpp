#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xolap/model.hpp"
#include "xolap/ops.hpp"

/// Flat relational evaluation of the OLAP operators, independent of the tree
/// algebra. Used to cross-check engine results.
namespace xolap::oracle {

struct Row {
  std::vector<std::string> coordinates;
  std::optional<std::string> measure;  ///< canonical decimal text

  bool operator==(const Row&) const = default;
  auto operator<=>(const Row&) const = default;
};

struct Relation {
  std::vector<std::string> dimensions;  ///< logical names
  std::vector<std::string> columns;     ///< current leaf tags, same length
  std::optional<std::string> measure;
  std::vector<Row> rows;
};

/// Pushed dimensions are read from the fact level; the measure keeps its value.
Relation flatten(const XolapCube& c);
/// Lattice rows carry the cuboid label as an extra leading column `label`.
Relation flatten(const ops::CubeLattice& lattice);

Relation rotate(const Relation& r, const ops::DimensionPermutation& perm);
Relation switch_members(const Relation& r, const ops::MemberSwap& swap);
/// Push leaves coordinates and measures untouched.
Relation push(const Relation& r, std::string_view dimension);
Relation pull(const Relation& r, std::string_view measure);
Relation slice(const Relation& r, const ops::SlicePredicate& pred);
Relation dice(const Relation& r, const ops::DicePredicate& pred);
Relation roll_up(const Relation& r, const HierarchySet& hs, const ops::RollupRequest& req);
Relation drill_down(const Relation& r, const Relation& base, const HierarchySet& hs, const ops::DrilldownRequest& req);
Relation cube(const Relation& r, const HierarchySet& hs, ops::AggFunction agg);

enum class CompareMode { Ordered, Multiset };

/// Ordered for rotate, switch and pull; Multiset otherwise.
CompareMode mode_for(std::string_view op);

struct Diff {
  std::vector<std::string> lines;
  bool empty() const { return lines.empty(); }
  std::string str() const;
};

Diff compare(const Relation& expected, const Relation& actual, CompareMode mode);

}  // namespace xolap::oracle
