#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xolap {

using NodeId = std::uint64_t;

/// One element of an ordered labeled tree.
struct Node {
  NodeId id = 0;
  std::string tag;
  std::optional<std::string> value;
  std::vector<std::size_t> children;  ///< indices into the owning tree
  std::optional<std::size_t> parent;
};

/// Nested description used to construct trees.
struct NodeSpec {
  std::string tag;
  std::optional<std::string> value;
  std::vector<NodeSpec> children;

  NodeSpec() = default;
  NodeSpec(std::string t, std::optional<std::string> v = std::nullopt,
           std::vector<NodeSpec> c = {})
      : tag(std::move(t)), value(std::move(v)), children(std::move(c)) {}
};

/// Immutable ordered labeled tree. Nodes are stored in document (pre-)order,
/// so the root is index 0 and the subtree of node i occupies [i, subtree_end(i)).
/// Node ids are process-unique and never reused; equality is structural.
class DataTree {
 public:
  DataTree() = default;

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  static constexpr std::size_t root() { return 0; }

  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const Node& root_node() const { return nodes_.at(0); }
  std::span<const Node> nodes() const { return nodes_; }

  std::size_t subtree_end(std::size_t i) const { return subtree_end_.at(i); }
  /// Proper ancestry.
  bool is_ancestor(std::size_t ancestor, std::size_t descendant) const {
    return ancestor < descendant && descendant < subtree_end_[ancestor];
  }
  bool is_leaf(std::size_t i) const { return nodes_[i].children.empty(); }

 private:
  friend DataTree build_tree(const NodeSpec& spec);
  std::vector<Node> nodes_;
  std::vector<std::size_t> subtree_end_;
};

/// Ordered collection of trees; the universe of the tree algebra.
using TreeCollection = std::vector<DataTree>;

/// Builds a tree with fresh ids assigned in document order.
/// Throws Error(Construction) on an empty tag anywhere in the spec.
DataTree build_tree(const NodeSpec& spec);

NodeSpec to_spec(const DataTree& tree, std::size_t index = DataTree::root());

DataTree deep_copy(const DataTree& tree);

/// Same shape, tags, values and child order; ids ignored.
bool structural_eq(const DataTree& a, const DataTree& b);
bool structural_eq(const TreeCollection& a, const TreeCollection& b);

/// Mutable working copy of a tree used by operators to stage edits.
///
/// Node indices of the source tree stay valid for the draft's lifetime; new
/// nodes get indices past the end. Detached nodes are dropped by build().
/// Top-level siblings (a root and anything inserted beside it) become
/// separate trees of the output collection.
class TreeDraft {
 public:
  explicit TreeDraft(const DataTree& source);

  std::size_t add_node(std::string tag, std::optional<std::string> value = std::nullopt);
  /// Deep-copies node `index` of `src` (with its subtree) as a detached node.
  std::size_t copy_from(const DataTree& src, std::size_t index);

  void append_child(std::size_t parent, std::size_t child);
  void prepend_child(std::size_t parent, std::size_t child);
  void insert_before(std::size_t sibling, std::size_t node);
  void insert_after(std::size_t sibling, std::size_t node);

  /// Removes a node with its subtree.
  void remove(std::size_t i);
  /// Removes a node, promoting its children into its position.
  void splice(std::size_t i);
  void set_value(std::size_t i, std::optional<std::string> value);
  /// `current` are siblings (or top-level nodes); the slot of current[i]
  /// receives replacement[i]. Both lists hold the same nodes.
  void rearrange(std::span<const std::size_t> current, std::span<const std::size_t> replacement);

  bool alive(std::size_t i) const;
  const std::optional<std::string>& value(std::size_t i) const { return nodes_.at(i).value; }

  TreeCollection build() const;

 private:
  struct DraftNode {
    std::string tag;
    std::optional<std::string> value;
    std::vector<std::size_t> children;
    std::optional<std::size_t> parent;
    bool removed = false;
  };
  std::vector<std::size_t>& siblings_of(std::size_t i);
  void detach(std::size_t i);
  NodeSpec spec_of(std::size_t i) const;

  std::vector<DraftNode> nodes_;
  std::vector<std::size_t> roots_;
};

}  // namespace xolap
