#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xolap/tree.hpp"

namespace xolap {

/// Pattern node id, dense from 0; the root is always 0.
using Pid = std::size_t;

enum class Axis { ParentChild, AncestorDescendant };
enum class CompareOp { Less, LessEq, Equal, GreaterEq, Greater };

struct AnyValue {};
struct ValueEquals { std::string value; };
struct ValueIn { std::vector<std::string> values; };
/// Numeric comparison when both sides are decimals. Otherwise `=`, `<=`, `>=`
/// fall back to exact string equality and `<`, `>` are false.
struct ValueCompare { CompareOp op; std::string value; };

using ValuePredicate = std::variant<AnyValue, ValueEquals, ValueIn, ValueCompare>;

struct PatternNode {
  Pid pid = 0;
  std::optional<std::string> tag;  ///< nullopt = any tag
  ValuePredicate value = AnyValue{};
  bool keep_subtree = false;
  std::optional<Pid> parent;
  Axis axis = Axis::ParentChild;  ///< edge to parent
  std::vector<Pid> children;      ///< ordered
};

class PatternTree {
 public:
  Pid add_root(std::optional<std::string> tag, ValuePredicate value = AnyValue{}, bool keep = false);
  Pid add_child(Pid parent, std::optional<std::string> tag, ValuePredicate value = AnyValue{},
                bool keep = false, Axis axis = Axis::ParentChild);

  std::size_t size() const { return nodes_.size(); }
  const PatternNode& node(Pid p) const { return nodes_.at(p); }
  static constexpr Pid root() { return 0; }
  std::vector<Pid> preorder() const;

  void set_keep(Pid p, bool keep) { nodes_.at(p).keep_subtree = keep; }
  void set_value_predicate(Pid p, ValuePredicate value) { nodes_.at(p).value = std::move(value); }
  /// Copy with keep_subtree set exactly on `pids` (a selection list).
  PatternTree with_keep(std::span<const Pid> pids) const;

 private:
  std::vector<PatternNode> nodes_;
};

bool satisfies(const PatternNode& p, const Node& n);

/// One embedding of a pattern into a data tree: map[pid] = data node index.
struct Embedding {
  const DataTree* source = nullptr;
  std::vector<std::size_t> map;

  std::size_t operator[](Pid p) const { return map.at(p); }
  const Node& node(Pid p) const { return source->node(map.at(p)); }
};

/// All injective embeddings, ordered by document order of the root image and
/// then of the remaining pattern nodes in pattern preorder. The pattern root
/// may map to any node of the tree.
std::vector<Embedding> match(const PatternTree& pattern, const DataTree& tree);

/// Witness tree of one embedding: the mapped nodes plus full subtrees of
/// nodes whose pattern node keeps its subtree. Children of a retained node are
/// its pattern children's images in pattern order, followed (for kept nodes)
/// by the remaining source children in source order.
DataTree witness(const Embedding& e, const PatternTree& pattern);

/// Parses the textual pattern form, e.g. `sale{keep}/city[=Lyon]`,
/// `sale/(product,city,year,amount){keep}`, `//department[num=69]`.
/// Throws Error(Parse) on malformed input.
PatternTree parse_pattern(std::string_view text);

}  // namespace xolap
