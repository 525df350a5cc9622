#include "xolap/oracle.hpp"

#include <algorithm>
#include <map>

#include "xolap/decimal.hpp"
#include "xolap/error.hpp"

namespace xolap::oracle {

namespace {

std::size_t column_of(const Relation& r, std::string_view name) {
  for (std::size_t i = 0; i < r.dimensions.size(); ++i)
    if (r.dimensions[i] == name || r.columns[i] == name) return i;
  throw Error(ErrorKind::Operator, "unknown-dimension", "oracle: unknown dimension '" + std::string(name) + "'");
}

const HierarchyTree& hierarchy_of(const HierarchySet& hs, const std::string& dimension) {
  auto it = hs.find(dimension);
  if (it == hs.end()) throw Error(ErrorKind::Operator, "no-hierarchy", "oracle: no hierarchy for '" + dimension + "'");
  return it->second;
}

std::size_t level_of(const HierarchyTree& h, std::string_view level) {
  auto i = h.level_index(level);
  if (!i) throw Error(ErrorKind::Operator, "unknown-level", "oracle: unknown level '" + std::string(level) + "'");
  return *i;
}

std::string mapped(const HierarchyTree& h, const std::string& member, std::size_t from, std::size_t to) {
  auto m = h.map_member(member, from, to);
  if (!m) throw Error(ErrorKind::Operator, "member-not-in-hierarchy", "oracle: '" + member + "' not in hierarchy");
  return *m;
}

std::string fold(ops::AggFunction ag, const std::vector<std::string>& values) {
  if (ag == ops::AggFunction::Count) return std::to_string(values.size());
  std::vector<Decimal> xs;
  for (const auto& v : values) {
    auto d = Decimal::parse(v);
    if (!d) throw Error(ErrorKind::Operator, "non-numeric-measure", "oracle: '" + v + "' is not a number");
    xs.push_back(*d);
  }
  switch (ag) {
    case ops::AggFunction::Min: return std::ranges::min(xs).str();
    case ops::AggFunction::Max: return std::ranges::max(xs).str();
    default: break;
  }
  Decimal total;
  for (const auto& x : xs) total = total + x;
  if (ag == ops::AggFunction::Avg) total = total / Decimal(static_cast<long long>(xs.size()));
  return total.str();
}

/// Groups rows on their full coordinate vector (first-occurrence order).
std::vector<Row> group_rows(const std::vector<Row>& rows, ops::AggFunction ag) {
  std::map<std::vector<std::string>, std::size_t> index;
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> groups;
  for (const auto& row : rows) {
    auto [it, fresh] = index.try_emplace(row.coordinates, groups.size());
    if (fresh) groups.push_back({row.coordinates, {}});
    groups[it->second].second.push_back(row.measure.value_or(""));
  }
  std::vector<Row> out;
  for (auto& [key, values] : groups) out.push_back({key, fold(ag, values)});
  return out;
}

std::string render(const Row& row) {
  std::string s = "(";
  for (std::size_t i = 0; i < row.coordinates.size(); ++i) s += (i ? "," : "") + row.coordinates[i];
  s += ")";
  if (row.measure) s += " -> " + *row.measure;
  return s;
}

std::string render_header(const Relation& r) {
  std::string s;
  for (std::size_t i = 0; i < r.columns.size(); ++i) s += (i ? "," : "") + r.columns[i];
  return s + (r.measure ? " | " + *r.measure : "");
}

}  // namespace

Relation flatten(const XolapCube& c) {
  Relation r;
  r.dimensions = c.schema.dimensions;
  r.columns = c.schema.leaf_tags();
  r.measure = c.schema.measure;
  for (auto& cell : to_cells(c)) {
    Row row;
    for (auto& [tag, member] : cell.coordinates) row.coordinates.push_back(member);
    if (cell.value) row.measure = canonical_number(*cell.value);
    r.rows.push_back(std::move(row));
  }
  return r;
}

Relation flatten(const ops::CubeLattice& lattice) {
  Relation r;
  r.dimensions = lattice.schema.dimensions;
  r.columns = lattice.schema.leaf_tags();
  r.dimensions.insert(r.dimensions.begin(), "label");
  r.columns.insert(r.columns.begin(), "label");
  r.measure = lattice.schema.measure;
  for (const auto& t : lattice.data) {
    for (std::size_t cb : t.root_node().children) {
      const Node& cuboid = t.node(cb);
      std::string label;
      for (std::size_t ch : cuboid.children) {
        const Node& n = t.node(ch);
        if (n.tag == "label") {
          label = n.value.value_or("");
          continue;
        }
        Row row{{label}, std::nullopt};
        for (std::size_t leaf : n.children) {
          const Node& l = t.node(leaf);
          if (r.measure && l.tag == *r.measure) row.measure = canonical_number(l.value.value_or(""));
          else row.coordinates.push_back(l.value.value_or(""));
        }
        r.rows.push_back(std::move(row));
      }
    }
  }
  return r;
}

Relation rotate(const Relation& r, const ops::DimensionPermutation& perm) {
  std::vector<std::size_t> order;
  for (const auto& d : perm.order) order.push_back(column_of(r, d));
  Relation out{{}, {}, r.measure, {}};
  for (std::size_t i : order) {
    out.dimensions.push_back(r.dimensions[i]);
    out.columns.push_back(r.columns[i]);
  }
  for (const auto& row : r.rows) {
    Row o{{}, row.measure};
    for (std::size_t i : order) o.coordinates.push_back(row.coordinates[i]);
    out.rows.push_back(std::move(o));
  }
  return out;
}

Relation switch_members(const Relation& r, const ops::MemberSwap& swap) {
  const std::size_t x = column_of(r, swap.dimension);
  Relation out = r;
  if (swap.first == swap.second) return out;
  // Collect the a/b rows as runs, then lay the runs back down in reverse.
  std::vector<std::size_t> slots;
  std::vector<std::vector<Row>> runs;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& m = r.rows[i].coordinates[x];
    if (m != swap.first && m != swap.second) continue;
    if (runs.empty() || runs.back().front().coordinates[x] != m) runs.emplace_back();
    runs.back().push_back(r.rows[i]);
    slots.push_back(i);
  }
  std::size_t k = 0;
  for (auto run = runs.rbegin(); run != runs.rend(); ++run)
    for (auto& row : *run) out.rows[slots[k++]] = row;
  return out;
}

Relation push(const Relation& r, std::string_view dimension) {
  column_of(r, dimension);
  return r;
}

Relation pull(const Relation& r, std::string_view measure) {
  if (!r.measure || *r.measure != measure)
    throw Error(ErrorKind::Operator, "unknown-measure", "oracle: '" + std::string(measure) + "' is not the measure");
  Relation out{{*r.measure}, {*r.measure}, std::nullopt, {}};
  out.dimensions.insert(out.dimensions.end(), r.dimensions.begin(), r.dimensions.end());
  out.columns.insert(out.columns.end(), r.columns.begin(), r.columns.end());
  for (const auto& row : r.rows) {
    Row o{{row.measure.value_or("")}, std::nullopt};
    o.coordinates.insert(o.coordinates.end(), row.coordinates.begin(), row.coordinates.end());
    out.rows.push_back(std::move(o));
  }
  return out;
}

Relation slice(const Relation& r, const ops::SlicePredicate& pred) {
  return dice(r, {{{pred.dimension, pred.members}}});
}

Relation dice(const Relation& r, const ops::DicePredicate& pred) {
  std::map<std::size_t, std::vector<std::string>> allowed;
  for (const auto& [dim, members] : pred.ranges) {
    auto& a = allowed[column_of(r, dim)];
    a.insert(a.end(), members.begin(), members.end());
  }
  Relation out = r;
  std::erase_if(out.rows, [&](const Row& row) {
    for (const auto& [i, members] : allowed)
      if (std::ranges::find(members, row.coordinates[i]) == members.end()) return true;
    return false;
  });
  return out;
}

Relation roll_up(const Relation& r, const HierarchySet& hs, const ops::RollupRequest& req) {
  const std::size_t x = column_of(r, req.dimension);
  const HierarchyTree& h = hierarchy_of(hs, r.dimensions[x]);
  const std::size_t from = level_of(h, r.columns[x]);
  const std::size_t to = level_of(h, req.level);
  if (to >= from) throw Error(ErrorKind::Operator, "level-not-coarser", "oracle: level is not coarser");
  Relation out = r;
  out.columns[x] = req.level;
  for (auto& row : out.rows) row.coordinates[x] = mapped(h, row.coordinates[x], from, to);
  out.rows = group_rows(out.rows, req.agg);
  return out;
}

Relation drill_down(const Relation& r, const Relation& base, const HierarchySet& hs, const ops::DrilldownRequest& req) {
  const std::size_t x = column_of(r, req.dimension);
  const HierarchyTree& h = hierarchy_of(hs, r.dimensions[x]);
  const std::size_t cur = level_of(h, r.columns[x]);
  const std::size_t to = level_of(h, req.level);
  if (to <= cur) throw Error(ErrorKind::Operator, "level-not-finer", "oracle: level is not finer");
  const std::size_t fine = level_of(h, base.columns[x]);

  Relation out = base;
  out.rows.clear();
  for (const auto& coarse : r.rows) {
    for (const auto& b : base.rows) {
      bool hit = mapped(h, b.coordinates[x], fine, cur) == coarse.coordinates[x];
      for (std::size_t i = 0; hit && i < b.coordinates.size(); ++i)
        if (i != x && b.coordinates[i] != coarse.coordinates[i]) hit = false;
      if (!hit) continue;
      Row row = b;
      row.coordinates[x] = mapped(h, b.coordinates[x], fine, to);
      out.rows.push_back(std::move(row));
    }
  }
  out.columns[x] = req.level;
  out.rows = group_rows(out.rows, req.agg);
  return out;
}

Relation cube(const Relation& r, const HierarchySet& hs, ops::AggFunction agg) {
  Relation top = r;
  for (std::size_t i = 0; i < top.dimensions.size(); ++i) {
    auto it = hs.find(top.dimensions[i]);
    if (it == hs.end()) continue;
    const std::size_t from = level_of(it->second, top.columns[i]);
    top.columns[i] = it->second.levels().front().name;
    for (auto& row : top.rows) row.coordinates[i] = mapped(it->second, row.coordinates[i], from, 0);
  }
  const std::size_t d = top.columns.size();
  Relation out{top.dimensions, top.columns, top.measure, {}};
  out.dimensions.insert(out.dimensions.begin(), "label");
  out.columns.insert(out.columns.begin(), "label");
  for (std::size_t mask = std::size_t{1} << d; mask-- > 0;) {
    std::string label;
    std::vector<bool> present(d);
    for (std::size_t i = 0; i < d; ++i) {
      present[i] = (mask >> (d - 1 - i)) & 1U;
      label += (i ? "," : "") + (present[i] ? top.columns[i] : std::string("ALL"));
    }
    std::vector<Row> projected;
    for (const auto& row : top.rows) {
      Row p{{label}, row.measure};
      for (std::size_t i = 0; i < d; ++i) p.coordinates.push_back(present[i] ? row.coordinates[i] : "ALL");
      projected.push_back(std::move(p));
    }
    for (auto& row : group_rows(projected, agg)) out.rows.push_back(std::move(row));
  }
  return out;
}

CompareMode mode_for(std::string_view op) {
  return op == "rotate" || op == "switch" || op == "pull" ? CompareMode::Ordered : CompareMode::Multiset;
}

std::string Diff::str() const {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

Diff compare(const Relation& expected, const Relation& actual, CompareMode mode) {
  Diff diff;
  if (expected.columns != actual.columns || expected.measure != actual.measure) {
    diff.lines.push_back("header: expected [" + render_header(expected) + "], got [" + render_header(actual) + "]");
    return diff;
  }
  if (mode == CompareMode::Ordered) {
    const std::size_t n = std::max(expected.rows.size(), actual.rows.size());
    for (std::size_t i = 0; i < n; ++i) {
      const Row* e = i < expected.rows.size() ? &expected.rows[i] : nullptr;
      const Row* a = i < actual.rows.size() ? &actual.rows[i] : nullptr;
      if (e && a && *e == *a) continue;
      diff.lines.push_back("row " + std::to_string(i) + ": expected " + (e ? render(*e) : "nothing") + ", got " +
                           (a ? render(*a) : "nothing"));
    }
    return diff;
  }
  auto e = expected.rows;
  auto a = actual.rows;
  std::ranges::sort(e);
  std::ranges::sort(a);
  std::vector<Row> missing, extra;
  std::ranges::set_difference(e, a, std::back_inserter(missing));
  std::ranges::set_difference(a, e, std::back_inserter(extra));
  for (const auto& row : missing) diff.lines.push_back("- " + render(row));
  for (const auto& row : extra) diff.lines.push_back("+ " + render(row));
  return diff;
}

}  // namespace xolap::oracle
