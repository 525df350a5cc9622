#include "xolap/ops.hpp"

#include <algorithm>
#include <map>

#include "xolap/decimal.hpp"
#include "xolap/error.hpp"

namespace xolap::ops {

using namespace xolap::tax;

namespace {

void require_valid(const XolapCube& c) {
  auto report = xolap::validate(c);
  if (!report.ok()) throw Error(ErrorKind::Validation, "invalid-cube", "invalid cube:\n" + report.summary());
}

std::size_t require_dimension(const CubeSchema& s, std::string_view name) {
  auto i = s.dimension_index(name);
  if (!i) throw Error(ErrorKind::Operator, "unknown-dimension", "unknown dimension '" + std::string(name) + "'");
  return *i;
}

void require_flat(const CubeSchema& s, std::string_view op) {
  if (!s.measure) throw Error(ErrorKind::Operator, "no-measure", std::string(op) + " requires a measure (cube was pulled)");
  if (!s.pushed.empty()) throw Error(ErrorKind::Operator, "pushed-cube", std::string(op) + " requires an unpushed cube");
}

const HierarchyTree& require_hierarchy(const XolapCube& c, const std::string& dimension) {
  auto it = c.hierarchies.find(dimension);
  if (it == c.hierarchies.end())
    throw Error(ErrorKind::Operator, "no-hierarchy", "no hierarchy for dimension '" + dimension + "'");
  return it->second;
}

std::size_t require_level(const HierarchyTree& h, std::string_view level) {
  auto i = h.level_index(level);
  if (!i) throw Error(ErrorKind::Operator, "unknown-level", "unknown level '" + std::string(level) + "'");
  return *i;
}

struct FactPids {
  Pid root;
  std::vector<Pid> dims;
  std::optional<Pid> measure;
};

// Fact node with one child per dimension leaf in schema order, then the measure.
FactPids add_fact(PatternTree& p, std::optional<Pid> parent, const CubeSchema& s, bool keep,
                  const std::map<std::size_t, ValuePredicate>& preds = {}) {
  FactPids f;
  f.root = parent ? p.add_child(*parent, s.fact_tag, AnyValue{}, keep) : p.add_root(s.fact_tag, AnyValue{}, keep);
  for (std::size_t i = 0; i < s.dimensions.size(); ++i) {
    auto it = preds.find(i);
    f.dims.push_back(p.add_child(f.root, s.leaf_tag(s.dimensions[i]), it == preds.end() ? ValuePredicate{AnyValue{}} : it->second));
  }
  if (s.measure) f.measure = p.add_child(f.root, *s.measure);
  return f;
}

XolapCube with_data(const XolapCube& c, CubeSchema schema, TreeCollection data) {
  return XolapCube{std::move(schema), std::move(data), c.hierarchies};
}

// Positions targeted by reversing the order of maximal same-member runs among
// entries equal to `a` or `b`; other entries keep their own position.
std::vector<std::size_t> run_reversal_ranks(std::span<const std::string> members, const std::string& a,
                                            const std::string& b) {
  std::vector<std::size_t> ranks(members.size());
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < members.size(); ++i) {
    ranks[i] = i;
    if (a != b && (members[i] == a || members[i] == b)) slots.push_back(i);
  }
  std::vector<std::vector<std::size_t>> runs;
  for (std::size_t s : slots) {
    if (runs.empty() || members[runs.back().front()] != members[s]) runs.emplace_back();
    runs.back().push_back(s);
  }
  std::size_t next = 0;
  for (auto run = runs.rbegin(); run != runs.rend(); ++run)
    for (std::size_t original : *run) ranks[original] = slots[next++];
  return ranks;
}

// Removes the group-by wrapper and member copies from fact-rooted group trees
// whose aggregate has been appended: fact(group-by(k...), fact..., m) -> fact(k..., m).
TreeCollection flatten_groups(const TreeCollection& c, const CubeSchema& s) {
  PatternTree p;
  Pid root = p.add_root(s.fact_tag);
  Pid by = p.add_child(root, "group-by");
  Pid member = p.add_child(root, s.fact_tag);
  return delete_nodes(c, p, {{member, DeleteMode::WithSubtree}, {by, DeleteMode::Splice}});
}

// fact(group-by(...), fact(..., m)...) -> appends ag over member measures.
TreeCollection aggregate_members(const TreeCollection& groups, const CubeSchema& s, AggFunction ag,
                                 OperatorReport& report) {
  PatternTree p;
  Pid root = p.add_root(s.fact_tag);
  Pid member = p.add_child(root, s.fact_tag);
  Pid measure = p.add_child(member, *s.measure);
  return aggregate(groups, p, measure, ag, {AppendAggregate{root, *s.measure}}, &report);
}

}  // namespace

AggFunction reaggregation(AggFunction agg) { return agg == AggFunction::Count ? AggFunction::Sum : agg; }

// ---------------------------------------------------------------------------

OpResult rotate(const XolapCube& c, const DimensionPermutation& perm) {
  require_valid(c);
  const CubeSchema& s = c.schema;
  std::vector<std::size_t> order;
  for (const auto& name : perm.order) order.push_back(require_dimension(s, name));
  std::vector<std::size_t> sorted = order;
  std::ranges::sort(sorted);
  if (sorted.size() != s.dimensions.size() || std::ranges::adjacent_find(sorted) != sorted.end())
    throw Error(ErrorKind::Operator, "invalid-permutation", "rotation must list every dimension exactly once");

  PatternTree p;
  Pid root = p.add_root(s.fact_tag);
  for (std::size_t i : order) p.add_child(root, s.leaf_tag(s.dimensions[i]));
  if (s.measure) p.add_child(root, *s.measure);

  CubeSchema out = s;
  out.dimensions.clear();
  for (std::size_t i : order) out.dimensions.push_back(s.dimensions[i]);
  return {with_data(c, out, select(c.data, p, {root})), {}};
}

OpResult switch_members(const XolapCube& c, const MemberSwap& swap) {
  require_valid(c);
  const CubeSchema& s = c.schema;
  std::size_t d = require_dimension(s, swap.dimension);

  PatternTree p;
  Pid root = p.add_root(s.fact_tag);
  Pid member = p.add_child(root, s.leaf_tag(s.dimensions[d]));
  OrderSpec o;
  o.function_pid = member;
  o.function = [a = swap.first, b = swap.second](std::span<const std::string> members) {
    return run_reversal_ranks(members, a, b);
  };
  return {with_data(c, s, reorder(c.data, p, o, {root})), {}};
}

OpResult push(const XolapCube& c, std::string_view dimension) {
  require_valid(c);
  const CubeSchema& s = c.schema;
  std::size_t d = require_dimension(s, dimension);
  if (!s.measure) throw Error(ErrorKind::Operator, "no-measure", "push requires a measure");

  PatternTree p;
  Pid root = p.add_root(s.fact_tag);
  Pid member = p.add_child(root, s.leaf_tag(s.dimensions[d]));
  Pid measure = p.add_child(root, *s.measure);
  OpResult r;
  TreeCollection data = copy_paste(c.data, p, {member}, {AttachCopyUnder{measure}}, &r.report);
  CubeSchema out = s;
  out.pushed.push_back(s.dimensions[d]);
  r.cube = with_data(c, out, std::move(data));
  return r;
}

OpResult pull(const XolapCube& c, std::string_view measure) {
  require_valid(c);
  const CubeSchema& s = c.schema;
  if (!s.measure || *s.measure != measure)
    throw Error(ErrorKind::Operator, "unknown-measure", "'" + std::string(measure) + "' is not the cube's measure");
  if (std::ranges::find(s.dimensions, measure) != s.dimensions.end())
    throw Error(ErrorKind::Operator, "name-clash", "measure name clashes with a dimension");

  PatternTree p;
  FactPids f = add_fact(p, std::nullopt, s, false);
  ProjectionList pl{{f.root, false}, {*f.measure, false}};
  for (Pid d : f.dims) pl.push_back({d, false});

  CubeSchema out = s;
  out.dimensions.insert(out.dimensions.begin(), *s.measure);
  out.measure.reset();
  out.pushed.clear();
  return {with_data(c, out, project(c.data, p, pl)), {}};
}

OpResult slice(const XolapCube& c, const SlicePredicate& pred) {
  require_valid(c);
  const CubeSchema& s = c.schema;
  std::size_t d = require_dimension(s, pred.dimension);
  PatternTree p;
  FactPids f = add_fact(p, std::nullopt, s, true, {{d, ValueIn{pred.members}}});
  return {with_data(c, s, product(select(c.data, p, {f.root}), s.collection_tag)), {}};
}

OpResult dice(const XolapCube& c, const DicePredicate& pred) {
  require_valid(c);
  const CubeSchema& s = c.schema;
  std::map<std::size_t, std::vector<std::string>> sets;
  for (const auto& [dim, members] : pred.ranges) {
    std::size_t d = require_dimension(s, dim);
    auto& target = sets[d];
    target.insert(target.end(), members.begin(), members.end());
  }
  std::map<std::size_t, ValuePredicate> preds;
  for (auto& [d, members] : sets) preds[d] = ValueIn{members};
  PatternTree p;
  FactPids f = add_fact(p, std::nullopt, s, true, preds);
  return {with_data(c, s, product(select(c.data, p, {f.root}), s.collection_tag)), {}};
}

// ---------------------------------------------------------------------------

OpResult roll_up(const XolapCube& c, const RollupRequest& req) {
  require_valid(c);
  const CubeSchema& s = c.schema;
  require_flat(s, "roll-up");
  const std::size_t x = require_dimension(s, req.dimension);
  const std::string& dim = s.dimensions[x];
  const HierarchyTree& h = require_hierarchy(c, dim);
  const auto cur = h.level_index(s.leaf_tag(dim));
  if (!cur) throw Error(ErrorKind::Operator, "unknown-level", "current level of '" + dim + "' not in its hierarchy");
  const std::size_t tgt = require_level(h, req.level);
  if (tgt >= *cur)
    throw Error(ErrorKind::Operator, "level-not-coarser", "level '" + req.level + "' is not coarser than '" + s.leaf_tag(dim) + "'");
  const std::string& attr = *h.levels()[tgt].key_attribute;
  OpResult r;

  // (1) separate the fact subtrees
  PatternTree p_sel;
  FactPids f_sel = add_fact(p_sel, std::nullopt, s, true);
  TreeCollection facts = select(c.data, p_sel, {f_sel.root});

  // (2) group by the other dimensions
  PatternTree p_grp;
  FactPids f_grp = add_fact(p_grp, std::nullopt, s, true);
  GroupingBasis g;
  for (std::size_t i = 0; i < f_grp.dims.size(); ++i)
    if (i != x) g.push_back(f_grp.dims[i]);
  TreeCollection groups = group(facts, p_grp, g);

  // (3) join each member's fine member with its ancestor in H
  JoinSpec js;
  Pid l_root = js.left.add_root("group");
  FactPids f_join = add_fact(js.left, l_root, s, true);
  Pid r_root = js.right.add_root(h.levels()[tgt].name);
  Pid r_attr = js.right.add_child(r_root, attr);
  Pid r_cur = js.right.add_child(r_root, h.levels()[*cur].name, AnyValue{}, false, Axis::AncestorDescendant);
  Pid r_link = *cur == h.finest() ? r_cur : js.right.add_child(r_cur, *h.levels()[*cur].key_attribute);
  js.links = {{f_join.dims[x], r_link}};
  js.right_keep = {r_attr};
  TreeCollection annotated = join(groups, TreeCollection{h.tree()}, js, &r.report);

  // sub-group by (ancestor, other dimensions), in schema order
  PatternTree p_sub;
  Pid s_root = p_sub.add_root("group", AnyValue{}, true);
  FactPids f_sub = add_fact(p_sub, s_root, s, false);
  Pid s_attr = p_sub.add_child(s_root, attr);
  GroupingBasis g_sub;
  for (std::size_t i = 0; i < f_sub.dims.size(); ++i) g_sub.push_back(i == x ? s_attr : f_sub.dims[i]);
  TreeCollection subgroups = group(annotated, p_sub, g_sub, {}, s.fact_tag);

  // (4) aggregate all measures of a subgroup into one node
  PatternTree p_agg;
  Pid a_root = p_agg.add_root(s.fact_tag);
  Pid a_member = p_agg.add_child(a_root, "group");
  Pid a_fact = p_agg.add_child(a_member, s.fact_tag);
  Pid a_measure = p_agg.add_child(a_fact, *s.measure);
  TreeCollection aggregated = aggregate(subgroups, p_agg, a_measure, req.agg, {AppendAggregate{a_root, *s.measure}}, &r.report);

  // (5) insert the target-level member, prune the previous granularity
  PatternTree p_ins;
  Pid i_root = p_ins.add_root(s.fact_tag);
  Pid i_by = p_ins.add_child(i_root, "group-by");
  Pid i_attr = p_ins.add_child(i_by, attr);
  TreeCollection inserted =
      insert_nodes(aggregated, p_ins, {{i_attr, h.levels()[tgt].name, ValueOf{i_attr}, InsertPosition::Before}});

  PatternTree p_del;
  Pid d_root = p_del.add_root(s.fact_tag);
  Pid d_by = p_del.add_child(d_root, "group-by");
  Pid d_attr = p_del.add_child(d_by, attr);
  Pid d_member = p_del.add_child(d_root, "group");
  TreeCollection rolled = delete_nodes(inserted, p_del,
                                       {{d_attr, DeleteMode::WithSubtree},
                                        {d_member, DeleteMode::WithSubtree},
                                        {d_by, DeleteMode::Splice}});

  CubeSchema out = s;
  out.level_of[dim] = h.levels()[tgt].name;
  r.cube = with_data(c, out, std::move(rolled));
  return r;
}

OpResult drill_down(const XolapCube& c, const XolapCube& base, const DrilldownRequest& req) {
  require_valid(c);
  require_valid(base);
  const CubeSchema& s = c.schema;
  const CubeSchema& bs = base.schema;
  require_flat(s, "drill-down");
  require_flat(bs, "drill-down");
  const std::size_t x = require_dimension(s, req.dimension);
  const std::string& dim = s.dimensions[x];
  const HierarchyTree& h = require_hierarchy(c, dim);
  const auto cur = h.level_index(s.leaf_tag(dim));
  if (!cur) throw Error(ErrorKind::Operator, "unknown-level", "current level of '" + dim + "' not in its hierarchy");
  const std::size_t tgt = require_level(h, req.level);
  if (tgt <= *cur)
    throw Error(ErrorKind::Operator, "level-not-finer", "level '" + req.level + "' is not finer than '" + s.leaf_tag(dim) + "'");

  // C0 must describe the same facts at the finest level of the drilled dimension.
  bool compatible = bs.dimensions == s.dimensions && bs.measure == s.measure && bs.fact_tag == s.fact_tag &&
                    bs.leaf_tag(dim) == h.levels()[h.finest()].name;
  for (std::size_t i = 0; compatible && i < s.dimensions.size(); ++i)
    if (i != x && bs.leaf_tag(s.dimensions[i]) != s.leaf_tag(s.dimensions[i])) compatible = false;
  if (!compatible)
    throw Error(ErrorKind::Operator, "base-schema-mismatch", "base cube C0 does not match the drilled cube's schema");

  const std::string& finest = h.levels()[h.finest()].name;
  OpResult r;

  PatternTree p_sel;
  FactPids f_sel = add_fact(p_sel, std::nullopt, s, true);
  TreeCollection facts = select(c.data, p_sel, {f_sel.root});

  // join with H: recover the finest members under each coarse member
  JoinSpec jh;
  FactPids fl = add_fact(jh.left, std::nullopt, s, true);
  Pid h_root = jh.right.add_root(h.levels()[*cur].name);
  Pid h_attr = jh.right.add_child(h_root, *h.levels()[*cur].key_attribute);
  Pid h_fine = jh.right.add_child(h_root, finest, AnyValue{}, false, Axis::AncestorDescendant);
  jh.links = {{fl.dims[x], h_attr}};
  jh.right_keep = {h_fine};
  TreeCollection with_members = join(facts, TreeCollection{h.tree()}, jh, &r.report);

  // join with C0: base facts for (fine member, other members)
  JoinSpec jb;
  FactPids fl2 = add_fact(jb.left, std::nullopt, s, true);
  Pid l_fine = jb.left.add_child(fl2.root, finest);
  FactPids fr = add_fact(jb.right, std::nullopt, bs, true);
  for (std::size_t i = 0; i < s.dimensions.size(); ++i)
    jb.links.push_back({i == x ? l_fine : fl2.dims[i], fr.dims[i]});
  jb.right_keep = {fr.root};
  // Expanded members without base facts are expected, so misses are not reported.
  TreeCollection with_base = join(with_members, base.data, jb);

  // mask the coarse member and the aggregated measure
  PatternTree p_proj;
  FactPids fp = add_fact(p_proj, std::nullopt, s, false);
  Pid p_fine = p_proj.add_child(fp.root, finest);
  FactPids fpb = add_fact(p_proj, fp.root, bs, false);
  ProjectionList pl{{fp.root, false}};
  for (std::size_t i = 0; i < s.dimensions.size(); ++i) pl.push_back({i == x ? p_fine : fp.dims[i], false});
  pl.push_back({*fpb.measure, false});
  TreeCollection base_facts = project(with_base, p_proj, pl);

  CubeSchema fine_schema = s;
  if (finest == dim) fine_schema.level_of.erase(dim);
  else fine_schema.level_of[dim] = finest;

  TreeCollection result;
  CubeSchema out = fine_schema;
  if (tgt == h.finest()) {
    PatternTree p_grp;
    FactPids fg = add_fact(p_grp, std::nullopt, fine_schema, true);
    TreeCollection groups = group(base_facts, p_grp, fg.dims, {}, s.fact_tag);
    result = flatten_groups(aggregate_members(groups, fine_schema, req.agg, r.report), fine_schema);
  } else {
    OpResult up = roll_up(with_data(c, fine_schema, std::move(base_facts)), {dim, req.level, req.agg});
    r.report.merge(up.report);
    out = up.cube.schema;
    result = std::move(up.cube.data);
  }
  r.cube = with_data(c, out, product(result, s.collection_tag));
  return r;
}

// ---------------------------------------------------------------------------

CubeLattice cube(const XolapCube& c, AggFunction agg) {
  require_valid(c);
  require_flat(c.schema, "cube");
  if (agg == AggFunction::Avg)
    throw Error(ErrorKind::Operator, "cube-avg-unsupported", "cube supports sum, count, min and max (avg does not re-aggregate)");

  CubeLattice lattice;
  XolapCube rolled = c;
  bool aggregated = false;
  for (const auto& dim : c.schema.dimensions) {
    auto h = c.hierarchies.find(dim);
    if (h == c.hierarchies.end()) continue;
    auto level = h->second.level_index(rolled.schema.leaf_tag(dim));
    if (!level || *level == 0) continue;
    OpResult up = roll_up(rolled, {dim, h->second.levels().front().name, aggregated ? reaggregation(agg) : agg});
    lattice.report.merge(up.report);
    rolled = std::move(up.cube);
    aggregated = true;
  }
  const CubeSchema& s = rolled.schema;
  const AggFunction cell_agg = aggregated ? reaggregation(agg) : agg;
  const std::size_t d = s.dimensions.size();
  const std::vector<std::string> tags = s.leaf_tags();

  TreeCollection cuboids;
  for (std::size_t mask = (std::size_t{1} << d); mask-- > 0;) {
    auto present = [&](std::size_t i) { return (mask >> (d - 1 - i)) & 1U; };
    PatternTree p_grp;
    FactPids fg = add_fact(p_grp, std::nullopt, s, true);
    GroupingBasis g;
    for (std::size_t i = 0; i < d; ++i)
      if (present(i)) g.push_back(fg.dims[i]);
    TreeCollection groups = group(rolled.data, p_grp, g, {}, s.fact_tag);
    TreeCollection totals = aggregate_members(groups, s, cell_agg, lattice.report);

    // ALL markers for the dimensions outside the grouping, in schema order
    PatternTree p_ins;
    Pid i_root = p_ins.add_root(s.fact_tag);
    Pid i_by = p_ins.add_child(i_root, "group-by");
    std::vector<std::optional<Pid>> key_pid(d);
    for (std::size_t i = 0; i < d; ++i)
      if (present(i)) key_pid[i] = p_ins.add_child(i_by, tags[i]);
    InsertionSpec is;
    for (std::size_t i = 0; i < d; ++i) {
      if (present(i)) continue;
      std::optional<Pid> next;
      for (std::size_t k = i + 1; k < d && !next; ++k) next = key_pid[k];
      if (next) is.push_back({*next, tags[i], std::string("ALL"), InsertPosition::Before});
      else is.push_back({i_by, tags[i], std::string("ALL"), InsertPosition::LastChild});
    }
    TreeCollection marked = is.empty() ? totals : insert_nodes(totals, p_ins, is);
    TreeCollection cells = flatten_groups(marked, s);

    std::string label;
    for (std::size_t i = 0; i < d; ++i) label += (i ? "," : "") + (present(i) ? tags[i] : std::string("ALL"));
    TreeCollection cuboid = product(cells, "cuboid");
    PatternTree p_label;
    Pid l_root = p_label.add_root("cuboid");
    cuboid = insert_nodes(cuboid, p_label, {{l_root, "label", label, InsertPosition::FirstChild}});
    cuboids.push_back(std::move(cuboid.front()));
  }
  lattice.schema = s;
  lattice.data = product(cuboids, "cube");
  return lattice;
}

ValidationReport validate(const CubeLattice& lattice) {
  ValidationReport report;
  const CubeSchema& s = lattice.schema;
  const auto tags = s.leaf_tags();
  auto issue = [&](std::size_t i, std::string code, std::string msg) {
    report.issues.push_back({i, std::move(code), std::move(msg)});
  };
  if (lattice.data.size() != 1 || lattice.data.front().root_node().tag != "cube") {
    issue(0, "bad-cube-root", "cube result must be a single 'cube' tree");
    return report;
  }
  const DataTree& t = lattice.data.front();
  const std::size_t expected = std::size_t{1} << tags.size();
  if (t.root_node().children.size() != expected)
    issue(0, "cuboid-count", "expected " + std::to_string(expected) + " cuboids");
  std::size_t fact_index = 0;
  for (std::size_t cb : t.root_node().children) {
    const Node& cuboid = t.node(cb);
    if (cuboid.tag != "cuboid" || cuboid.children.empty() || t.node(cuboid.children.front()).tag != "label") {
      issue(fact_index, "bad-cuboid", "cuboid must start with a label");
      continue;
    }
    const std::string label = t.node(cuboid.children.front()).value.value_or("");
    for (std::size_t i = 1; i < cuboid.children.size(); ++i, ++fact_index) {
      const Node& fact = t.node(cuboid.children[i]);
      std::string fact_label;
      bool ok = fact.tag == s.fact_tag && fact.children.size() == tags.size() + 1;
      for (std::size_t k = 0; ok && k < tags.size(); ++k) {
        const Node& leaf = t.node(fact.children[k]);
        ok = leaf.tag == tags[k] && leaf.value;
        if (ok) fact_label += (k ? "," : "") + (*leaf.value == "ALL" ? std::string("ALL") : tags[k]);
      }
      if (ok) {
        const Node& m = t.node(fact.children.back());
        ok = m.tag == s.measure && m.value && Decimal::is_number(*m.value);
      }
      if (!ok) issue(fact_index, "bad-cell", "malformed cuboid cell");
      else if (fact_label != label) issue(fact_index, "label-mismatch", "cell does not match cuboid label '" + label + "'");
    }
  }
  return report;
}

}  // namespace xolap::ops
