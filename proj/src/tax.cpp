#include "xolap/tax.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "xolap/decimal.hpp"
#include "xolap/error.hpp"

namespace xolap::tax {

namespace {
thread_local TraceScope* active_trace = nullptr;
}  // namespace

TraceScope::TraceScope() : outer_(active_trace) { active_trace = this; }
TraceScope::~TraceScope() { active_trace = outer_; }

void record_call(std::string_view op) {
  for (TraceScope* s = active_trace; s; s = s->outer_) s->calls_.emplace_back(op);
}

std::string_view to_string(AggFunction f) {
  switch (f) {
    case AggFunction::Sum: return "sum";
    case AggFunction::Count: return "count";
    case AggFunction::Avg: return "avg";
    case AggFunction::Min: return "min";
    case AggFunction::Max: return "max";
  }
  return "sum";
}

AggFunction parse_agg_function(std::string_view name) {
  for (auto f : {AggFunction::Sum, AggFunction::Count, AggFunction::Avg, AggFunction::Min, AggFunction::Max})
    if (to_string(f) == name) return f;
  throw Error(ErrorKind::Usage, "unknown-agg", "unknown aggregation function '" + std::string(name) + "'");
}

std::optional<std::string> evaluate_aggregate(AggFunction ag, std::span<const std::string> values) {
  if (ag == AggFunction::Count) return std::to_string(values.size());
  std::vector<Decimal> nums;
  nums.reserve(values.size());
  for (const auto& v : values) {
    auto d = Decimal::parse(v);
    if (!d) throw Error(ErrorKind::Operator, "non-numeric-measure",
                        "cannot aggregate non-numeric value '" + v + "' with " + std::string(to_string(ag)));
    nums.push_back(*d);
  }
  if (nums.empty()) {
    if (ag == AggFunction::Sum) return "0";
    return std::nullopt;
  }
  switch (ag) {
    case AggFunction::Sum:
    case AggFunction::Avg: {
      Decimal total;
      for (const auto& n : nums) total = total + n;
      if (ag == AggFunction::Sum) return total.str();
      return (total / Decimal(static_cast<long long>(nums.size()))).str();
    }
    case AggFunction::Min: return std::ranges::min(nums).str();
    case AggFunction::Max: return std::ranges::max(nums).str();
    default: break;
  }
  return std::nullopt;
}

namespace {

std::string value_or_empty(const Node& n) { return n.value.value_or(std::string()); }

std::optional<std::string> resolve(const ValueSource& src, const Embedding& e) {
  if (auto* lit = std::get_if<std::string>(&src)) return *lit;
  return e.node(std::get<ValueOf>(src).pid).value;
}

// Assembles the nodes of `items` (data index + keep flag, in output order)
// into trees: each node nests under its nearest retained ancestor.
TreeCollection assemble(const DataTree& src, const std::vector<std::pair<std::size_t, bool>>& items) {
  std::vector<bool> retained(src.size(), false);
  for (const auto& [d, keep] : items) retained[d] = true;

  auto retained_parent = [&](std::size_t d) -> std::optional<std::size_t> {
    for (auto p = src.node(d).parent; p; p = src.node(*p).parent)
      if (retained[*p]) return p;
    return std::nullopt;
  };

  std::map<std::size_t, std::vector<std::size_t>> kids;  // retained parent -> items
  std::vector<std::size_t> roots;
  std::map<std::size_t, bool> keep_of;
  for (const auto& [d, keep] : items) {
    if (keep_of.contains(d)) continue;
    keep_of[d] = keep;
    if (auto p = retained_parent(d)) kids[*p].push_back(d);
    else roots.push_back(d);
  }

  std::function<NodeSpec(std::size_t, bool)> emit = [&](std::size_t d, bool kept) {
    const Node& n = src.node(d);
    NodeSpec spec(n.tag, n.value);
    if (auto it = kids.find(d); it != kids.end())
      for (std::size_t k : it->second) spec.children.push_back(emit(k, keep_of[k]));
    if (kept)
      for (std::size_t k : n.children)
        if (!retained[k]) spec.children.push_back(emit(k, true));
    return spec;
  };

  TreeCollection out;
  for (std::size_t r : roots) out.push_back(build_tree(emit(r, keep_of[r])));
  return out;
}

// Pattern made of the root-to-target path only; returns it with the target's
// pid in the pruned pattern.
std::pair<PatternTree, Pid> path_to(const PatternTree& p, Pid target) {
  std::vector<Pid> chain;
  for (std::optional<Pid> cur = target; cur; cur = p.node(*cur).parent) chain.push_back(*cur);
  std::reverse(chain.begin(), chain.end());
  PatternTree out;
  Pid last = 0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const PatternNode& n = p.node(chain[i]);
    last = i == 0 ? out.add_root(n.tag, n.value) : out.add_child(last, n.tag, n.value, false, n.axis);
  }
  return {out, last};
}

int compare_keys(const std::string& a, const std::string& b, const OrderKey& k) {
  int c = 0;
  if (k.kind == KeyKind::Numeric) {
    auto x = Decimal::parse(a), y = Decimal::parse(b);
    if (x && y) c = *x < *y ? -1 : (*y < *x ? 1 : 0);
    else if (x) c = -1;
    else if (y) c = 1;
    else c = a.compare(b);
  } else {
    c = a.compare(b);
  }
  c = c < 0 ? -1 : (c > 0 ? 1 : 0);
  return k.direction == Direction::Descending ? -c : c;
}

// Stable ordering permutation of `entries` (each holding its key values in the
// order of `o.keys`, or the function input as its single value).
std::vector<std::size_t> order_permutation(const std::vector<std::vector<std::string>>& entries,
                                           const OrderSpec& o) {
  std::vector<std::size_t> idx(entries.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (o.function_pid) {
    std::vector<std::string> inputs;
    for (const auto& e : entries) inputs.push_back(e.empty() ? std::string() : e.back());
    std::vector<std::size_t> ranks = o.function(inputs);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });
    return idx;
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t k = 0; k < o.keys.size(); ++k) {
      int c = compare_keys(entries[a][k], entries[b][k], o.keys[k]);
      if (c != 0) return c < 0;
    }
    return false;
  });
  return idx;
}

std::vector<std::string> order_inputs(const Embedding& e, const OrderSpec& o) {
  std::vector<std::string> keys;
  for (const auto& k : o.keys) keys.push_back(value_or_empty(e.node(k.pid)));
  if (o.function_pid) keys.push_back(value_or_empty(e.node(*o.function_pid)));
  return keys;
}

}  // namespace

// ---------------------------------------------------------------------------

TreeCollection select(const TreeCollection& c, const PatternTree& p, const SelectionList& sl) {
  record_call("select");
  PatternTree pattern = p;
  for (Pid pid : sl) pattern.set_keep(pid, true);
  TreeCollection out;
  for (const auto& t : c)
    for (const auto& e : match(pattern, t)) out.push_back(witness(e, pattern));
  return out;
}

TreeCollection project(const TreeCollection& c, const PatternTree& p, const ProjectionList& pl) {
  record_call("project");
  TreeCollection out;
  for (const auto& t : c) {
    for (const auto& e : match(p, t)) {
      std::vector<std::pair<std::size_t, bool>> items;
      for (const auto& item : pl) items.emplace_back(e[item.pid], item.keep_subtree);
      for (auto& tree : assemble(t, items)) out.push_back(std::move(tree));
    }
  }
  return out;
}

TreeCollection product(const TreeCollection& c, std::string root_tag) {
  record_call("product");
  NodeSpec root(std::move(root_tag));
  root.children.reserve(c.size());
  for (const auto& t : c) root.children.push_back(to_spec(t));
  TreeCollection out;
  out.push_back(build_tree(root));
  return out;
}

TreeCollection join(const TreeCollection& left, const TreeCollection& right, const JoinSpec& spec,
                    OperatorReport* report) {
  record_call("join");
  struct Partner {
    const DataTree* tree;
    std::vector<std::size_t> grafts;
  };
  std::map<std::vector<std::string>, std::vector<Partner>> partners;
  for (const auto& r : right) {
    for (const auto& e : match(spec.right, r)) {
      std::vector<std::string> key;
      bool complete = true;
      for (const auto& l : spec.links) {
        const auto& v = e.node(l.right).value;
        if (!v) complete = false;
        else key.push_back(*v);
      }
      if (!complete) continue;
      Partner partner{&r, {}};
      for (Pid k : spec.right_keep) {
        std::size_t d = e[k];
        bool nested = std::ranges::any_of(spec.right_keep, [&](Pid o) { return r.is_ancestor(e[o], d); });
        if (!nested && std::ranges::find(partner.grafts, d) == partner.grafts.end()) partner.grafts.push_back(d);
      }
      partners[key].push_back(std::move(partner));
    }
  }

  TreeCollection out;
  for (const auto& l : left) {
    for (const auto& e : match(spec.left, l)) {
      std::vector<std::string> key;
      for (const auto& link : spec.links) key.push_back(value_or_empty(e.node(link.left)));
      auto it = partners.find(key);
      if (it == partners.end()) {
        if (report) {
          std::string shown;
          for (const auto& k : key) shown += (shown.empty() ? "" : ", ") + k;
          report->warn("join: no partner for link value(s) '" + shown + "'; left tree dropped");
        }
        continue;
      }
      const DataTree w = witness(e, spec.left);
      for (const auto& partner : it->second) {
        TreeDraft draft(w);
        for (std::size_t g : partner.grafts) draft.append_child(0, draft.copy_from(*partner.tree, g));
        for (auto& t : draft.build()) out.push_back(std::move(t));
      }
    }
  }
  return out;
}

TreeCollection group(const TreeCollection& c, const PatternTree& p, const GroupingBasis& g, const OrderSpec& o,
                     std::string root_tag) {
  record_call("group");
  struct Group {
    std::vector<NodeSpec> key_leaves;
    std::vector<std::string> order_values;
    std::vector<NodeSpec> members;
  };
  std::vector<Group> groups;
  std::map<std::vector<std::optional<std::string>>, std::size_t> index;
  for (const auto& t : c) {
    for (const auto& e : match(p, t)) {
      std::vector<std::optional<std::string>> key;
      for (Pid pid : g) key.push_back(e.node(pid).value);
      auto [it, fresh] = index.try_emplace(key, groups.size());
      if (fresh) {
        Group grp;
        for (Pid pid : g) grp.key_leaves.push_back(to_spec(t, e[pid]));
        grp.order_values = order_inputs(e, o);
        groups.push_back(std::move(grp));
      }
      groups[it->second].members.push_back(to_spec(witness(e, p)));
    }
  }

  std::vector<std::size_t> perm(groups.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  if (!o.empty()) {
    std::vector<std::vector<std::string>> entries;
    for (const auto& grp : groups) entries.push_back(grp.order_values);
    perm = order_permutation(entries, o);
  }

  TreeCollection out;
  for (std::size_t i : perm) {
    NodeSpec root(root_tag);
    root.children.emplace_back("group-by", std::nullopt, std::move(groups[i].key_leaves));
    for (auto& m : groups[i].members) root.children.push_back(std::move(m));
    out.push_back(build_tree(root));
  }
  return out;
}

TreeCollection aggregate(const TreeCollection& c, const PatternTree& p, Pid measure, AggFunction ag,
                         const UpdateSpec& us, OperatorReport* report) {
  record_call("aggregate");
  TreeCollection out;
  for (const auto& t : c) {
    const auto embeddings = match(p, t);
    std::vector<std::size_t> measures;
    for (const auto& e : embeddings)
      if (std::ranges::find(measures, e[measure]) == measures.end()) measures.push_back(e[measure]);
    std::sort(measures.begin(), measures.end());

    std::vector<std::string> values;
    for (std::size_t m : measures) {
      const auto& v = t.node(m).value;
      if (!v && ag != AggFunction::Count)
        throw Error(ErrorKind::Operator, "non-numeric-measure", "measure node '" + t.node(m).tag + "' has no value");
      values.push_back(v.value_or(""));
    }
    std::optional<std::string> result = evaluate_aggregate(ag, values);
    if (!result) {
      if (report) report->warn("aggregate: " + std::string(to_string(ag)) + " over no values; tree passed through");
      out.push_back(deep_copy(t));
      continue;
    }

    TreeDraft draft(t);
    for (std::size_t m : measures) draft.remove(m);
    for (const auto& directive : us) {
      const auto* append = std::get_if<AppendAggregate>(&directive);
      if (!append) throw Error(ErrorKind::Operator, "bad-update-spec", "aggregate accepts AppendAggregate directives only");
      std::optional<std::size_t> target;
      if (!embeddings.empty()) {
        target = embeddings.front()[append->target];
      } else {
        auto [path, pid] = path_to(p, append->target);
        auto found = match(path, t);
        if (!found.empty()) target = found.front()[pid];
      }
      if (!target) {
        if (report) report->warn("aggregate: target not matched; tree passed through");
        continue;
      }
      draft.append_child(*target, draft.add_node(append->result_tag, *result));
    }
    for (auto& built : draft.build()) out.push_back(std::move(built));
  }
  return out;
}

TreeCollection reorder(const TreeCollection& c, const PatternTree& p, const OrderSpec& o, const ReorderList& rl) {
  record_call("reorder");
  struct RootEntry {
    std::size_t tree;
    std::vector<std::string> keys;
  };
  std::vector<RootEntry> root_entries;
  TreeCollection staged;

  for (std::size_t ti = 0; ti < c.size(); ++ti) {
    const DataTree& t = c[ti];
    const auto embeddings = match(p, t);
    TreeDraft draft(t);
    for (Pid r : rl) {
      // parent -> (node, keys) in sibling order
      std::map<std::size_t, std::vector<std::pair<std::size_t, std::vector<std::string>>>> runs;
      std::set<std::size_t> seen;
      for (const auto& e : embeddings) {
        std::size_t d = e[r];
        if (!seen.insert(d).second) continue;
        if (const auto& parent = t.node(d).parent) {
          runs[*parent].emplace_back(d, order_inputs(e, o));
        } else if (std::ranges::none_of(root_entries, [&](const RootEntry& re) { return re.tree == ti; })) {
          root_entries.push_back(RootEntry{ti, order_inputs(e, o)});
        }
      }
      for (auto& [parent, run] : runs) {
        std::ranges::sort(run, {}, [](const auto& x) { return x.first; });
        std::vector<std::vector<std::string>> entries;
        std::vector<std::size_t> current;
        for (const auto& [node, keys] : run) {
          entries.push_back(keys);
          current.push_back(node);
        }
        std::vector<std::size_t> replacement;
        for (std::size_t i : order_permutation(entries, o)) replacement.push_back(current[i]);
        draft.rearrange(current, replacement);
      }
    }
    auto built = draft.build();
    staged.push_back(std::move(built.front()));
  }

  if (root_entries.size() > 1) {
    std::vector<std::vector<std::string>> entries;
    for (const auto& re : root_entries) entries.push_back(re.keys);
    std::vector<std::size_t> perm = order_permutation(entries, o);
    TreeCollection original = staged;
    for (std::size_t i = 0; i < perm.size(); ++i)
      staged[root_entries[i].tree] = std::move(original[root_entries[perm[i]].tree]);
  }
  return staged;
}

TreeCollection copy_paste(const TreeCollection& c, const PatternTree& p, const CopyList& cl, const UpdateSpec& us,
                          OperatorReport* report) {
  record_call("copy_paste");
  TreeCollection out;
  for (const auto& t : c) {
    const auto embeddings = match(p, t);
    if (embeddings.empty() && !us.empty() && report) report->warn("copy_paste: update target unmatched; tree passed through");
    TreeDraft draft(t);
    for (const auto& e : embeddings) {
      for (const auto& directive : us) {
        if (const auto* attach = std::get_if<AttachCopyUnder>(&directive)) {
          for (Pid pid : cl) draft.append_child(e[attach->target], draft.copy_from(t, e[pid]));
        } else if (const auto* set = std::get_if<SetValue>(&directive)) {
          draft.set_value(e[set->target], resolve(set->source, e));
        } else {
          throw Error(ErrorKind::Operator, "bad-update-spec", "copy_paste does not accept AppendAggregate");
        }
      }
    }
    for (auto& built : draft.build()) out.push_back(std::move(built));
  }
  return out;
}

TreeCollection delete_nodes(const TreeCollection& c, const PatternTree& p, const DeletionSpec& ds) {
  record_call("delete_nodes");
  TreeCollection out;
  for (const auto& t : c) {
    TreeDraft draft(t);
    for (const auto& e : match(p, t)) {
      for (const auto& target : ds) {
        if (target.mode == DeleteMode::WithSubtree) draft.remove(e[target.pid]);
        else draft.splice(e[target.pid]);
      }
    }
    for (auto& built : draft.build()) out.push_back(std::move(built));
  }
  return out;
}

TreeCollection insert_nodes(const TreeCollection& c, const PatternTree& p, const InsertionSpec& is) {
  record_call("insert_nodes");
  TreeCollection out;
  for (const auto& t : c) {
    TreeDraft draft(t);
    for (const auto& e : match(p, t)) {
      for (const auto& d : is) {
        std::optional<std::string> value = d.value ? resolve(*d.value, e) : std::nullopt;
        std::size_t fresh = draft.add_node(d.tag, std::move(value));
        std::size_t target = e[d.target];
        switch (d.position) {
          case InsertPosition::FirstChild: draft.prepend_child(target, fresh); break;
          case InsertPosition::LastChild: draft.append_child(target, fresh); break;
          case InsertPosition::Before: draft.insert_before(target, fresh); break;
          case InsertPosition::After: draft.insert_after(target, fresh); break;
        }
      }
    }
    for (auto& built : draft.build()) out.push_back(std::move(built));
  }
  return out;
}

}  // namespace xolap::tax
