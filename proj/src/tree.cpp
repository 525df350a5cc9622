#include "xolap/tree.hpp"

#include <algorithm>
#include <atomic>
#include <functional>

#include "xolap/error.hpp"

namespace xolap {

namespace {

std::atomic<NodeId> next_node_id{1};

std::size_t count_nodes(const NodeSpec& spec) {
  std::size_t n = 1;
  for (const auto& c : spec.children) n += count_nodes(c);
  return n;
}

}  // namespace

DataTree build_tree(const NodeSpec& spec) {
  DataTree tree;
  const std::size_t total = count_nodes(spec);
  tree.nodes_.reserve(total);
  tree.subtree_end_.resize(total);
  NodeId id = next_node_id.fetch_add(total);

  std::function<std::size_t(const NodeSpec&, std::optional<std::size_t>)> emit =
      [&](const NodeSpec& s, std::optional<std::size_t> parent) {
        if (s.tag.empty()) throw Error(ErrorKind::Construction, "empty-tag", "node tag must not be empty");
        const std::size_t index = tree.nodes_.size();
        tree.nodes_.push_back(Node{id++, s.tag, s.value, {}, parent});
        for (const auto& c : s.children) {
          std::size_t child = emit(c, index);
          tree.nodes_[index].children.push_back(child);
        }
        tree.subtree_end_[index] = tree.nodes_.size();
        return index;
      };
  emit(spec, std::nullopt);
  return tree;
}

NodeSpec to_spec(const DataTree& tree, std::size_t index) {
  const Node& n = tree.node(index);
  NodeSpec s(n.tag, n.value);
  s.children.reserve(n.children.size());
  for (std::size_t c : n.children) s.children.push_back(to_spec(tree, c));
  return s;
}

DataTree deep_copy(const DataTree& tree) { return build_tree(to_spec(tree)); }

bool structural_eq(const DataTree& a, const DataTree& b) {
  if (a.size() != b.size()) return false;
  // Preorder storage: equal shapes have identical child index lists.
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Node& x = a.node(i);
    const Node& y = b.node(i);
    if (x.tag != y.tag || x.value != y.value || x.children != y.children) return false;
  }
  return true;
}

bool structural_eq(const TreeCollection& a, const TreeCollection& b) {
  return std::ranges::equal(a, b, [](const DataTree& x, const DataTree& y) { return structural_eq(x, y); });
}

// ---------------------------------------------------------------------------

TreeDraft::TreeDraft(const DataTree& source) {
  nodes_.reserve(source.size());
  for (const Node& n : source.nodes()) nodes_.push_back(DraftNode{n.tag, n.value, n.children, n.parent});
  if (!source.empty()) roots_.push_back(0);
}

std::size_t TreeDraft::add_node(std::string tag, std::optional<std::string> value) {
  if (tag.empty()) throw Error(ErrorKind::Construction, "empty-tag", "node tag must not be empty");
  nodes_.push_back(DraftNode{std::move(tag), std::move(value), {}, std::nullopt});
  return nodes_.size() - 1;
}

std::size_t TreeDraft::copy_from(const DataTree& src, std::size_t index) {
  const Node& n = src.node(index);
  std::size_t copy = add_node(n.tag, n.value);
  for (std::size_t c : n.children) append_child(copy, copy_from(src, c));
  return copy;
}

std::vector<std::size_t>& TreeDraft::siblings_of(std::size_t i) {
  auto& p = nodes_.at(i).parent;
  return p ? nodes_[*p].children : roots_;
}

void TreeDraft::detach(std::size_t i) {
  auto& sibs = siblings_of(i);
  sibs.erase(std::find(sibs.begin(), sibs.end(), i));
  nodes_[i].parent.reset();
}

void TreeDraft::append_child(std::size_t parent, std::size_t child) {
  nodes_.at(parent).children.push_back(child);
  nodes_.at(child).parent = parent;
}

void TreeDraft::prepend_child(std::size_t parent, std::size_t child) {
  auto& ch = nodes_.at(parent).children;
  ch.insert(ch.begin(), child);
  nodes_.at(child).parent = parent;
}

void TreeDraft::insert_before(std::size_t sibling, std::size_t node) {
  auto& sibs = siblings_of(sibling);
  sibs.insert(std::find(sibs.begin(), sibs.end(), sibling), node);
  nodes_.at(node).parent = nodes_[sibling].parent;
}

void TreeDraft::insert_after(std::size_t sibling, std::size_t node) {
  auto& sibs = siblings_of(sibling);
  sibs.insert(std::find(sibs.begin(), sibs.end(), sibling) + 1, node);
  nodes_.at(node).parent = nodes_[sibling].parent;
}

bool TreeDraft::alive(std::size_t i) const {
  for (std::optional<std::size_t> cur = i; cur; cur = nodes_[*cur].parent) {
    if (nodes_[*cur].removed) return false;
    if (!nodes_[*cur].parent) return std::find(roots_.begin(), roots_.end(), *cur) != roots_.end();
  }
  return false;
}

void TreeDraft::remove(std::size_t i) {
  if (!alive(i)) return;
  detach(i);
  nodes_[i].removed = true;
}

void TreeDraft::splice(std::size_t i) {
  if (!alive(i)) return;
  auto& sibs = siblings_of(i);
  auto pos = std::find(sibs.begin(), sibs.end(), i);
  std::vector<std::size_t> kids = nodes_[i].children;
  for (std::size_t k : kids) nodes_[k].parent = nodes_[i].parent;
  pos = sibs.erase(pos);
  sibs.insert(pos, kids.begin(), kids.end());
  nodes_[i].children.clear();
  nodes_[i].parent.reset();
  nodes_[i].removed = true;
}

void TreeDraft::set_value(std::size_t i, std::optional<std::string> value) { nodes_.at(i).value = std::move(value); }

void TreeDraft::rearrange(std::span<const std::size_t> current, std::span<const std::size_t> replacement) {
  if (current.empty()) return;
  auto& sibs = siblings_of(current.front());
  std::vector<std::size_t> slots;
  for (std::size_t n : current) slots.push_back(static_cast<std::size_t>(std::find(sibs.begin(), sibs.end(), n) - sibs.begin()));
  for (std::size_t i = 0; i < slots.size(); ++i) sibs[slots[i]] = replacement[i];
}

NodeSpec TreeDraft::spec_of(std::size_t i) const {
  const DraftNode& n = nodes_[i];
  NodeSpec s(n.tag, n.value);
  for (std::size_t c : n.children) s.children.push_back(spec_of(c));
  return s;
}

TreeCollection TreeDraft::build() const {
  TreeCollection out;
  out.reserve(roots_.size());
  for (std::size_t r : roots_) out.push_back(build_tree(spec_of(r)));
  return out;
}

}  // namespace xolap
