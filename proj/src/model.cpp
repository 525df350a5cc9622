#include "xolap/model.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "xolap/decimal.hpp"
#include "xolap/error.hpp"

namespace xolap {

std::string CubeSchema::leaf_tag(const std::string& dimension) const {
  auto it = level_of.find(dimension);
  return it == level_of.end() ? dimension : it->second;
}

std::vector<std::string> CubeSchema::leaf_tags() const {
  std::vector<std::string> tags;
  for (const auto& d : dimensions) tags.push_back(leaf_tag(d));
  return tags;
}

std::optional<std::size_t> CubeSchema::dimension_index(std::string_view name_or_tag) const {
  for (std::size_t i = 0; i < dimensions.size(); ++i)
    if (dimensions[i] == name_or_tag) return i;
  for (std::size_t i = 0; i < dimensions.size(); ++i)
    if (leaf_tag(dimensions[i]) == name_or_tag) return i;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void bad_hierarchy(const std::string& msg) { throw Error(ErrorKind::Validation, "bad-hierarchy", msg); }

}  // namespace

HierarchyTree HierarchyTree::from_tree(DataTree tree) {
  HierarchyTree h;
  h.tree_ = std::move(tree);
  const DataTree& t = h.tree_;
  if (t.empty() || t.root_node().children.empty()) bad_hierarchy("hierarchy has no members");

  std::function<void(const std::vector<std::size_t>&, std::size_t, std::optional<std::size_t>)> walk =
      [&](const std::vector<std::size_t>& nodes, std::size_t depth, std::optional<std::size_t> parent) {
        const std::string& tag = t.node(nodes.front()).tag;
        const bool leaf_level = t.is_leaf(nodes.front());
        if (depth == h.levels_.size()) {
          h.levels_.push_back(HierarchyLevel{tag, std::nullopt});
          h.members_.emplace_back();
          h.parent_.emplace_back();
          h.index_.emplace_back();
        } else if (h.levels_[depth].name != tag) {
          bad_hierarchy("level " + std::to_string(depth) + " mixes tags '" + h.levels_[depth].name + "' and '" + tag + "'");
        }
        for (std::size_t n : nodes) {
          const Node& node = t.node(n);
          if (node.tag != tag) bad_hierarchy("level mixes tags '" + tag + "' and '" + node.tag + "'");
          if (t.is_leaf(n) != leaf_level) bad_hierarchy("ragged hierarchy at level '" + tag + "'");
          LevelMember member{tag, {}, {}};
          std::vector<std::size_t> sub;
          if (leaf_level) {
            if (!node.value) bad_hierarchy("finest member without a value at level '" + tag + "'");
            member.value = *node.value;
          } else {
            const std::string& child_tag = t.node(node.children.back()).tag;
            // attributes: leading leaves not tagged like the member children
            std::size_t i = 0;
            for (; i < node.children.size() && t.node(node.children[i]).tag != child_tag; ++i) {
              const Node& an = t.node(node.children[i]);
              if (!t.is_leaf(node.children[i]) || !an.value) bad_hierarchy("attribute '" + an.tag + "' must be a valued leaf");
              member.attributes.emplace_back(an.tag, *an.value);
            }
            for (; i < node.children.size(); ++i) {
              if (t.node(node.children[i]).tag != child_tag) bad_hierarchy("attributes must precede members under '" + tag + "'");
              sub.push_back(node.children[i]);
            }
            if (member.attributes.empty()) bad_hierarchy("level '" + tag + "' member without key attribute");
            const std::string& key = member.attributes.front().first;
            auto& level = h.levels_[depth];
            if (!level.key_attribute) level.key_attribute = key;
            else if (*level.key_attribute != key) bad_hierarchy("inconsistent key attribute at level '" + tag + "'");
            member.value = member.attributes.front().second;
          }
          if (h.index_[depth].contains(member.value))
            throw Error(ErrorKind::Validation, "non-strict-hierarchy",
                        "non-strict hierarchy: member '" + member.value + "' of level '" + tag + "' appears more than once");
          const std::size_t idx = h.members_[depth].size();
          h.index_[depth].emplace(member.value, idx);
          h.members_[depth].push_back(std::move(member));
          h.parent_[depth].push_back(parent.value_or(0));
          if (!sub.empty()) walk(sub, depth + 1, idx);
        }
      };
  walk(t.root_node().children, 0, std::nullopt);

  // every non-finest level must reach the same depth
  for (std::size_t d = 0; d + 1 < h.levels_.size(); ++d)
    if (!h.levels_[d].key_attribute) bad_hierarchy("level '" + h.levels_[d].name + "' has no members below it");
  return h;
}

std::optional<std::size_t> HierarchyTree::level_index(std::string_view level) const {
  for (std::size_t i = 0; i < levels_.size(); ++i)
    if (levels_[i].name == level) return i;
  return std::nullopt;
}

std::optional<std::string> HierarchyTree::map_member(std::string_view member, std::size_t from, std::size_t to) const {
  if (from >= levels_.size() || to > from) return std::nullopt;
  auto it = index_[from].find(member);
  if (it == index_[from].end()) return std::nullopt;
  std::size_t idx = it->second;
  for (std::size_t level = from; level > to; --level) idx = parent_[level][idx];
  return members_[to][idx].value;
}

LevelMember lookup_level(const HierarchyTree& h, std::string_view member, std::string_view level) {
  auto target = h.level_index(level);
  if (!target) throw Error(ErrorKind::Operator, "unknown-level", "unknown level '" + std::string(level) + "'");
  for (std::size_t from = h.levels().size(); from-- > 0;) {
    if (!h.map_member(member, from, from)) continue;
    if (*target > from)
      throw Error(ErrorKind::Operator, "level-not-coarser",
                  "level '" + std::string(level) + "' is not coarser than member '" + std::string(member) + "'");
    const auto value = h.map_member(member, from, *target);
    for (const auto& m : h.members(*target))
      if (m.value == *value) return m;
  }
  throw Error(ErrorKind::Operator, "member-not-in-hierarchy", "member '" + std::string(member) + "' not in hierarchy");
}

// ---------------------------------------------------------------------------

bool XolapCube::is_base() const {
  for (const auto& d : schema.dimensions) {
    auto h = hierarchies.find(d);
    if (h != hierarchies.end() && schema.leaf_tag(d) != h->second.dimension()) return false;
  }
  return true;
}

std::vector<FactRef> fact_refs(const TreeCollection& data, const std::string& collection_tag) {
  std::vector<FactRef> refs;
  for (const auto& t : data) {
    if (t.empty()) continue;
    if (t.root_node().tag == collection_tag)
      for (std::size_t c : t.root_node().children) refs.push_back(FactRef{&t, c});
    else
      refs.push_back(FactRef{&t, DataTree::root()});
  }
  return refs;
}

std::vector<FactRef> fact_refs(const XolapCube& c) { return fact_refs(c.data, c.schema.collection_tag); }

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& i : issues)
    out += "fact " + std::to_string(i.fact_index) + ": " + i.code + ": " + i.message + "\n";
  return out;
}

ValidationReport validate(const XolapCube& c) {
  ValidationReport report;
  const CubeSchema& s = c.schema;
  const std::vector<std::string> dims = s.leaf_tags();
  auto issue = [&](std::size_t fact, std::string code, std::string msg) {
    report.issues.push_back(ValidationIssue{fact, std::move(code), std::move(msg)});
  };

  const auto refs = fact_refs(c);
  for (std::size_t fi = 0; fi < refs.size(); ++fi) {
    const DataTree& t = *refs[fi].tree;
    const Node& fact = t.node(refs[fi].node);
    if (fact.tag != s.fact_tag) {
      issue(fi, "bad-fact-tag", "expected fact tag '" + s.fact_tag + "', found '" + fact.tag + "'");
      continue;
    }
    std::vector<std::string> tags;
    for (std::size_t ch : fact.children) tags.push_back(t.node(ch).tag);

    std::set<std::string> seen;
    for (const auto& tag : tags) {
      if (!seen.insert(tag).second) issue(fi, "duplicate-child", "duplicate child '" + tag + "'");
      if (std::ranges::find(dims, tag) == dims.end() && tag != s.measure)
        issue(fi, "unexpected-child", "unexpected child '" + tag + "'");
    }
    for (const auto& d : dims)
      if (!seen.contains(d)) issue(fi, "missing-dimension", "missing dimension " + d);

    std::vector<std::string> present_dims;
    for (const auto& tag : tags)
      if (std::ranges::find(dims, tag) != dims.end()) present_dims.push_back(tag);
    std::vector<std::string> expected_order;
    for (const auto& d : dims)
      if (std::ranges::find(present_dims, d) != present_dims.end()) expected_order.push_back(d);

    if (s.measure) {
      auto m = std::ranges::find(tags, *s.measure);
      if (m == tags.end()) {
        issue(fi, "missing-measure", "missing measure " + *s.measure);
      } else {
        if (m + 1 != tags.end()) issue(fi, "measure-not-last", "measure not last");
        const std::size_t mi = fact.children[static_cast<std::size_t>(m - tags.begin())];
        const Node& mn = t.node(mi);
        if (!mn.value || !Decimal::is_number(*mn.value))
          issue(fi, "non-numeric-measure", "measure value '" + mn.value.value_or("") + "' is not a number");
        std::vector<std::string> pushed_tags;
        for (std::size_t ch : mn.children) pushed_tags.push_back(t.node(ch).tag);
        std::vector<std::string> expected_pushed;
        for (const auto& p : s.pushed) expected_pushed.push_back(s.leaf_tag(p));
        if (pushed_tags != expected_pushed) issue(fi, "measure-not-leaf", "measure has unexpected children");
      }
    }
    if (present_dims != expected_order) issue(fi, "out-of-order", "dimensions out of schema order");

    for (std::size_t ch : fact.children) {
      const Node& n = t.node(ch);
      if (n.tag == s.measure) continue;
      if (!t.is_leaf(ch) || !n.value) issue(fi, "bad-member", "dimension '" + n.tag + "' must be a valued leaf");
    }
  }
  return report;
}

std::vector<CubeCellView> to_cells(const XolapCube& c) {
  auto report = validate(c);
  if (!report.ok()) throw Error(ErrorKind::Validation, "invalid-cube", "invalid cube:\n" + report.summary());
  std::vector<CubeCellView> cells;
  for (const auto& ref : fact_refs(c)) {
    CubeCellView cell;
    for (std::size_t ch : ref.tree->node(ref.node).children) {
      const Node& n = ref.tree->node(ch);
      if (c.schema.measure && n.tag == *c.schema.measure) cell.value = n.value;
      else cell.coordinates.emplace_back(n.tag, n.value.value_or(""));
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

XolapCube from_cells(const CubeSchema& schema, std::span<const CubeCellView> cells, HierarchySet hierarchies) {
  XolapCube cube{schema, {}, std::move(hierarchies)};
  for (const auto& cell : cells) {
    NodeSpec fact(schema.fact_tag);
    for (const auto& [tag, member] : cell.coordinates) fact.children.emplace_back(tag, member);
    if (schema.measure) fact.children.emplace_back(*schema.measure, cell.value);
    cube.data.push_back(build_tree(fact));
  }
  return cube;
}

void attach_hierarchies(XolapCube& c, HierarchySet hierarchies) {
  auto& s = c.schema;
  for (auto& dim : s.dimensions) {
    const std::string tag = s.leaf_tag(dim);
    if (hierarchies.contains(dim)) continue;
    for (const auto& [name, h] : hierarchies) {
      if (h.level_index(tag)) {
        s.level_of.erase(dim);
        for (auto& p : s.pushed)
          if (p == dim) p = name;
        dim = name;
        if (tag != name) s.level_of[name] = tag;
        break;
      }
    }
  }
  c.hierarchies = std::move(hierarchies);
}

}  // namespace xolap
