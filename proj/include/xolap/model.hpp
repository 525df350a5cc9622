#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xolap/tree.hpp"

namespace xolap {

/// Tags the operator pipelines use for intermediate trees; cubes may not use them.
inline constexpr std::string_view kReservedTags[] = {"group", "group-by", "cube", "cuboid", "label"};

/// Multidimensional shape of a fact collection.
///
/// Dimensions are identified by their logical name (e.g. `city`), which stays
/// stable across roll-ups; the leaf tag inside each fact is the dimension's
/// current level (`level_of`, e.g. `department` after a roll-up).
struct CubeSchema {
  std::string fact_tag = "sale";
  std::string collection_tag = "sales";
  std::vector<std::string> dimensions;   ///< reading order
  std::optional<std::string> measure;    ///< nullopt once pulled into the dimensions
  std::map<std::string, std::string> level_of;
  std::vector<std::string> pushed;       ///< dimensions copied under the measure, in push order

  std::string leaf_tag(const std::string& dimension) const;
  std::vector<std::string> leaf_tags() const;
  /// Accepts either a logical dimension name or its current leaf tag.
  std::optional<std::size_t> dimension_index(std::string_view name_or_tag) const;

  bool operator==(const CubeSchema&) const = default;
};

struct HierarchyLevel {
  std::string name;
  std::optional<std::string> key_attribute;  ///< display attribute; finest level uses the node value
};

/// A member at some level: its display value plus its attributes.
struct LevelMember {
  std::string level;
  std::string value;
  std::vector<std::pair<std::string, std::string>> attributes;
};

/// Strict dimension hierarchy held as a tree: `hierarchy` root, then nested
/// level elements coarse to fine. Non-finest level nodes start with attribute
/// leaves (e.g. `num`) followed by their child-level members; finest-level
/// members are leaves whose value is the member.
class HierarchyTree {
 public:
  /// Throws Error(Validation, "non-strict-hierarchy") when a member appears
  /// under two parents, Error(Validation, "bad-hierarchy") on other shape issues.
  static HierarchyTree from_tree(DataTree tree);

  /// Logical dimension name: the finest level's name.
  const std::string& dimension() const { return levels_.back().name; }
  const std::vector<HierarchyLevel>& levels() const { return levels_; }
  std::optional<std::size_t> level_index(std::string_view level) const;
  std::size_t finest() const { return levels_.size() - 1; }
  const DataTree& tree() const { return tree_; }

  const std::vector<LevelMember>& members(std::size_t level) const { return members_.at(level); }
  /// Display value of `member` (at level `from`) at the coarser-or-equal level `to`.
  std::optional<std::string> map_member(std::string_view member, std::size_t from, std::size_t to) const;

 private:
  DataTree tree_;
  std::vector<HierarchyLevel> levels_;
  std::vector<std::vector<LevelMember>> members_;
  std::vector<std::vector<std::size_t>> parent_;  ///< per level: index of parent member one level up
  std::vector<std::map<std::string, std::size_t, std::less<>>> index_;
};

/// Hierarchies indexed by logical dimension name.
using HierarchySet = std::map<std::string, HierarchyTree, std::less<>>;

/// Unique ancestor of `member` at `level`.
/// Errors: "member-not-in-hierarchy", "unknown-level", "level-not-coarser".
LevelMember lookup_level(const HierarchyTree& h, std::string_view member, std::string_view level);

/// Validated fact collection. `data` holds either one tree per fact or a
/// single tree rooted at the collection tag with the facts as its children.
struct XolapCube {
  CubeSchema schema;
  TreeCollection data;
  HierarchySet hierarchies;

  /// Finest declared level on every hierarchical dimension.
  bool is_base() const;
};

/// Location of a fact root inside a cube's data.
struct FactRef {
  const DataTree* tree;
  std::size_t node;
};
std::vector<FactRef> fact_refs(const XolapCube& c);
/// Tree-level variant for non-cube collections.
std::vector<FactRef> fact_refs(const TreeCollection& data, const std::string& collection_tag);

struct ValidationIssue {
  std::size_t fact_index;
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

/// Never throws; lists every violation with its fact index.
ValidationReport validate(const XolapCube& c);

/// Conceptual cell of one fact: coordinates keyed by leaf tag.
struct CubeCellView {
  std::vector<std::pair<std::string, std::string>> coordinates;
  std::optional<std::string> value;

  bool operator==(const CubeCellView&) const = default;
};

/// Throws Error(Validation, "invalid-cube") carrying the validate() summary.
std::vector<CubeCellView> to_cells(const XolapCube& c);
XolapCube from_cells(const CubeSchema& schema, std::span<const CubeCellView> cells, HierarchySet hierarchies = {});

/// Rebinds dimensions whose leaf tag is a level of some hierarchy to that
/// hierarchy's logical dimension (and sets level_of accordingly).
void attach_hierarchies(XolapCube& c, HierarchySet hierarchies);

}  // namespace xolap
