#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "xolap/error.hpp"
#include "xolap/ops.hpp"
#include "xolap/xml_io.hpp"

namespace xolap::testing {

std::string data_path(const std::string& relative) { return std::string(XOLAP_DATA_DIR) + "/" + relative; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

XolapCube fixture_cube() {
  return load_cube(read_text(data_path("sales.xml")), {read_text(data_path("geo.xml"))});
}

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::string measure_text(std::mt19937_64& rng) {
  std::size_t whole = pick(rng, 0, 99);
  if (pick(rng, 0, 3) == 0) return std::to_string(whole) + "." + std::to_string(pick(rng, 1, 9));
  return std::to_string(whole);
}

}  // namespace

RandomCubeText random_cube_text(std::mt19937_64& rng, const RandomCubeLimits& limits) {
  const std::size_t dims = pick(rng, 1, limits.max_dims);
  std::vector<std::size_t> domain(dims);
  RandomCubeText out;
  for (std::size_t d = 0; d < dims; ++d) {
    domain[d] = pick(rng, 1, limits.max_members);
    const std::string dim = "d" + std::to_string(d);
    const std::size_t groups = pick(rng, 1, std::min<std::size_t>(3, domain[d]));
    std::vector<std::vector<std::size_t>> members(groups);
    for (std::size_t m = 0; m < domain[d]; ++m) members[m < groups ? m : pick(rng, 0, groups - 1)].push_back(m);
    std::string h = "<hierarchy>\n";
    for (std::size_t g = 0; g < groups; ++g) {
      h += "  <" + dim + "g code=\"G" + std::to_string(g) + "\">\n";
      for (std::size_t m : members[g]) h += "    <" + dim + ">" + dim + "m" + std::to_string(m) + "</" + dim + ">\n";
      h += "  </" + dim + "g>\n";
    }
    out.hierarchies.push_back(h + "</hierarchy>\n");
  }
  const std::size_t facts = pick(rng, 1, limits.max_facts);
  std::string f = "<sales>\n";
  for (std::size_t i = 0; i < facts; ++i) {
    f += "  <sale>\n";
    for (std::size_t d = 0; d < dims; ++d) {
      const std::string dim = "d" + std::to_string(d);
      f += "    <" + dim + ">" + dim + "m" + std::to_string(pick(rng, 0, domain[d] - 1)) + "</" + dim + ">\n";
    }
    f += "    <amount>" + measure_text(rng) + "</amount>\n  </sale>\n";
  }
  out.facts = f + "</sales>\n";
  return out;
}

XolapCube random_cube(std::mt19937_64& rng, const RandomCubeLimits& limits) {
  auto text = random_cube_text(rng, limits);
  XolapCube c = load_cube(text.facts, text.hierarchies);
  if (pick(rng, 0, 1) == 0) {
    TreeCollection split;
    for (const auto& ref : fact_refs(c)) split.push_back(build_tree(to_spec(*ref.tree, ref.node)));
    c.data = std::move(split);
  }
  return c;
}

std::vector<std::string> members_of(const XolapCube& c, std::size_t d) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& cell : to_cells(c))
    if (seen.insert(cell.coordinates[d].second).second) out.push_back(cell.coordinates[d].second);
  return out;
}

OpRequest random_request(std::mt19937_64& rng, const XolapCube& c, const std::string& op) {
  const auto& s = c.schema;
  const std::size_t dims = s.dimensions.size();
  const std::size_t d = pick(rng, 0, dims - 1);
  const std::string& dim = s.dimensions[d];
  auto member = [&](std::size_t k) {
    auto ms = members_of(c, k);
    return ms[pick(rng, 0, ms.size() - 1)];
  };
  auto subset = [&](std::size_t k) {
    auto ms = members_of(c, k);
    std::vector<std::string> out;
    for (const auto& m : ms)
      if (pick(rng, 0, 1)) out.push_back(m);
    if (out.empty()) out.push_back(ms.front());
    if (pick(rng, 0, 4) == 0) out.push_back("absent");
    return out;
  };
  static const std::vector<std::string> aggs{"sum", "count", "avg", "min", "max"};
  OpRequest req;
  req.op = op;
  if (op == "rotate") {
    std::vector<std::string> perm = s.dimensions;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::string text;
    for (const auto& p : perm) text += (text.empty() ? "" : ",") + p;
    req.set("perm", text);
  } else if (op == "switch") {
    req.set("dimension", dim).add("member", member(d)).add("member", member(d));
  } else if (op == "push") {
    req.set("dimension", dim);
  } else if (op == "slice") {
    for (const auto& m : subset(d)) req.add("where", dim + "=" + m);
  } else if (op == "dice") {
    for (std::size_t k = 0; k < dims; ++k) {
      if (k != d && pick(rng, 0, 1)) continue;
      for (const auto& m : subset(k)) req.add("where", s.dimensions[k] + "=" + m);
    }
  } else if (op == "rollup") {
    req.set("dimension", dim).set("level", dim + "g").set("agg", aggs[pick(rng, 0, aggs.size() - 1)]);
  } else if (op == "drilldown") {
    req.set("dimension", dim).set("level", dim).set("agg", aggs[pick(rng, 0, aggs.size() - 1)]);
  } else if (op == "cube") {
    static const std::vector<std::string> cube_aggs{"sum", "count", "min", "max"};
    req.set("agg", cube_aggs[pick(rng, 0, cube_aggs.size() - 1)]);
  }
  return req;
}

PreparedInput prepare(const XolapCube& c, const OpRequest& req) {
  if (req.op != "drilldown") return {c, nullptr};
  const std::string dim = *req.get("dimension");
  auto rolled = ops::roll_up(c, {dim, dim + "g", tax::parse_agg_function(req.get("agg").value_or("sum"))});
  return {std::move(rolled.cube), &c};
}

}  // namespace xolap::testing

namespace xolap::testing {

namespace {

const std::vector<std::string> kTags{"a", "b", "c"};
const std::vector<std::string> kValues{"1", "2", "x"};

}  // namespace

DataTree random_tree(std::mt19937_64& rng, std::size_t max_nodes) {
  const std::size_t n = pick(rng, 1, max_nodes);
  std::vector<NodeSpec> nodes;
  std::vector<std::vector<std::size_t>> kids(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<std::string> v;
    if (pick(rng, 0, 2)) v = kValues[pick(rng, 0, kValues.size() - 1)];
    nodes.emplace_back(kTags[pick(rng, 0, kTags.size() - 1)], v);
    if (i > 0) kids[pick(rng, 0, i - 1)].push_back(i);
  }
  std::function<NodeSpec(std::size_t)> build = [&](std::size_t i) {
    NodeSpec s = nodes[i];
    for (std::size_t k : kids[i]) s.children.push_back(build(k));
    return s;
  };
  return build_tree(build(0));
}

PatternTree random_pattern(std::mt19937_64& rng, std::size_t max_nodes) {
  auto tag = [&]() -> std::optional<std::string> {
    std::size_t k = pick(rng, 0, kTags.size());
    if (k == kTags.size()) return std::nullopt;
    return kTags[k];
  };
  auto pred = [&]() -> ValuePredicate {
    switch (pick(rng, 0, 5)) {
      case 0: return ValueEquals{kValues[pick(rng, 0, kValues.size() - 1)]};
      case 1: return ValueIn{{"1", "x"}};
      case 2: return ValueCompare{CompareOp::LessEq, "1"};
      case 3: return ValueCompare{CompareOp::Greater, "1"};
      default: return AnyValue{};
    }
  };
  PatternTree p;
  p.add_root(tag(), pred());
  const std::size_t n = pick(rng, 1, max_nodes);
  for (std::size_t i = 1; i < n; ++i)
    p.add_child(pick(rng, 0, i - 1), tag(), pred(), false,
                pick(rng, 0, 2) == 0 ? Axis::AncestorDescendant : Axis::ParentChild);
  return p;
}

std::size_t brute_force_embeddings(const PatternTree& p, const DataTree& t) {
  const std::size_t k = p.size();
  const std::size_t n = t.size();
  std::vector<std::size_t> map(k, 0);
  std::size_t count = 0;
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; ok && i < k; ++i) {
      const PatternNode& pn = p.node(i);
      ok = satisfies(pn, t.node(map[i]));
      for (std::size_t j = 0; ok && j < i; ++j) ok = map[i] != map[j];
      if (ok && pn.parent) {
        ok = pn.axis == Axis::ParentChild ? t.node(map[i]).parent == map[*pn.parent]
                                          : t.is_ancestor(map[*pn.parent], map[i]);
      }
    }
    if (ok) ++count;
    std::size_t pos = 0;
    while (pos < k && ++map[pos] == n) map[pos++] = 0;
    if (pos == k) break;
  }
  return count;
}

}  // namespace xolap::testing

namespace xolap::testing {

ServerHarness::ServerHarness() : service_(store_) {
  port_ = service_.bind("127.0.0.1", 0);
  if (port_ < 0) throw std::runtime_error("cannot bind a local port");
  thread_ = std::thread([this] { service_.serve(); });
}

ServerHarness::~ServerHarness() {
  service_.stop();
  thread_.join();
}

}  // namespace xolap::testing
