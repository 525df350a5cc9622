#include "xolap/request.hpp"

#include <algorithm>

#include "xolap/error.hpp"
#include "xolap/xml_io.hpp"

namespace xolap {

OpRequest& OpRequest::set(const std::string& key, std::string value) {
  params[key] = {std::move(value)};
  return *this;
}

OpRequest& OpRequest::add(const std::string& key, std::string value) {
  params[key].push_back(std::move(value));
  return *this;
}

std::optional<std::string> OpRequest::get(std::string_view key) const {
  auto it = params.find(std::string(key));
  if (it == params.end() || it->second.empty()) return std::nullopt;
  return it->second.front();
}

std::vector<std::string> OpRequest::all(std::string_view key) const {
  auto it = params.find(std::string(key));
  return it == params.end() ? std::vector<std::string>{} : it->second;
}

nlohmann::ordered_json OpRequest::to_json() const {
  nlohmann::ordered_json j;
  j["op"] = op;
  for (const auto& [key, values] : params) {
    if (values.size() == 1) j[key] = values.front();
    else j[key] = values;
  }
  return j;
}

OpRequest OpRequest::from_json(const nlohmann::json& body) {
  if (!body.is_object()) throw Error(ErrorKind::Usage, "bad-request", "operation request must be a JSON object");
  OpRequest req;
  for (const auto& [key, value] : body.items()) {
    if (key == "op") {
      if (!value.is_string()) throw Error(ErrorKind::Usage, "bad-request", "'op' must be a string");
      req.op = value.get<std::string>();
      continue;
    }
    auto take = [&](const nlohmann::json& v) {
      if (v.is_string()) req.add(key, v.get<std::string>());
      else if (v.is_number()) req.add(key, v.dump());
      else throw Error(ErrorKind::Usage, "bad-request", "'" + key + "' must hold strings");
    };
    if (value.is_array()) {
      req.params[key];
      for (const auto& v : value) take(v);
    } else {
      take(value);
    }
  }
  if (req.op.empty()) throw Error(ErrorKind::Usage, "bad-request", "missing 'op'");
  return req;
}

XolapCube load_cube(std::string_view facts_xml, const std::vector<std::string>& hierarchy_xml) {
  XolapCube c = parse_facts(facts_xml);
  HierarchySet hs;
  for (const auto& text : hierarchy_xml) {
    HierarchyTree h = parse_hierarchy(text);
    std::string dim = h.dimension();
    hs.insert_or_assign(std::move(dim), std::move(h));
  }
  attach_hierarchies(c, std::move(hs));
  return c;
}

namespace {

std::string required(const OpRequest& req, std::string_view key) {
  auto v = req.get(key);
  if (!v || v->empty())
    throw Error(ErrorKind::Usage, "missing-parameter", req.op + " requires --" + std::string(key));
  return *v;
}

ops::AggFunction agg_of(const OpRequest& req) {
  return tax::parse_agg_function(req.get("agg").value_or("sum"));
}

std::vector<std::string> split_commas(const std::vector<std::string>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) {
    std::size_t start = 0;
    while (start <= v.size()) {
      std::size_t end = v.find(',', start);
      if (end == std::string::npos) end = v.size();
      if (end > start) out.push_back(v.substr(start, end - start));
      start = end + 1;
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> where_clauses(const OpRequest& req) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& w : req.all("where")) {
    auto eq = w.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorKind::Usage, "bad-where", "--where expects DIMENSION=VALUE, got '" + w + "'");
    out.emplace_back(w.substr(0, eq), w.substr(eq + 1));
  }
  return out;
}

ops::SlicePredicate slice_of(const OpRequest& req) {
  ops::SlicePredicate p;
  auto where = where_clauses(req);
  if (!where.empty()) {
    p.dimension = where.front().first;
    for (const auto& [d, v] : where) {
      if (d != p.dimension)
        throw Error(ErrorKind::Usage, "slice-one-dimension", "slice takes members of a single dimension; use dice");
      p.members.push_back(v);
    }
  } else {
    p.dimension = required(req, "dimension");
    p.members = req.all("member");
  }
  if (p.members.empty()) throw Error(ErrorKind::Usage, "missing-parameter", "slice requires at least one member");
  return p;
}

ops::DicePredicate dice_of(const OpRequest& req) {
  ops::DicePredicate p;
  for (const auto& [d, v] : where_clauses(req)) {
    auto it = std::ranges::find(p.ranges, d, &std::pair<std::string, std::vector<std::string>>::first);
    if (it == p.ranges.end()) p.ranges.push_back({d, {v}});
    else it->second.push_back(v);
  }
  if (p.ranges.empty()) throw Error(ErrorKind::Usage, "missing-parameter", "dice requires --where");
  return p;
}

ops::MemberSwap swap_of(const OpRequest& req) {
  auto members = req.all("member");
  if (members.size() != 2) throw Error(ErrorKind::Usage, "missing-parameter", "switch requires exactly two --member values");
  return {required(req, "dimension"), members[0], members[1]};
}

std::string measure_of(const XolapCube& c, const OpRequest& req) {
  if (auto m = req.get("measure")) return *m;
  if (!c.schema.measure) throw Error(ErrorKind::Usage, "missing-parameter", "pull requires --measure");
  return *c.schema.measure;
}

// Roll-up and drill-down need a hierarchy for the dimension (usage error otherwise).
void require_hierarchy(const XolapCube& c, const std::string& dimension) {
  auto i = c.schema.dimension_index(dimension);
  if (!i) return;  // the operator reports the unknown dimension
  if (!c.hierarchies.contains(c.schema.dimensions[*i]))
    throw Error(ErrorKind::Usage, "missing-hierarchy", "no --hierarchy given for dimension '" + dimension + "'");
}

const XolapCube& require_base(const XolapCube* base) {
  if (!base) throw Error(ErrorKind::Usage, "missing-base", "drilldown requires the base cube (--base)");
  return *base;
}

void check_op(const OpRequest& req) {
  if (std::ranges::find(operator_names(), req.op) == operator_names().end())
    throw Error(ErrorKind::Usage, "unknown-op", "unknown operation '" + req.op + "'");
}

}  // namespace

ApplyResult apply_request(const XolapCube& current, const XolapCube* base, const OpRequest& req) {
  check_op(req);
  ApplyResult out;
  std::optional<ops::OpResult> r;
  const std::string& op = req.op;
  if (op == "rotate") {
    r = ops::rotate(current, {split_commas(req.all("perm"))});
  } else if (op == "switch") {
    r = ops::switch_members(current, swap_of(req));
  } else if (op == "push") {
    r = ops::push(current, required(req, "dimension"));
  } else if (op == "pull") {
    r = ops::pull(current, measure_of(current, req));
  } else if (op == "slice") {
    r = ops::slice(current, slice_of(req));
  } else if (op == "dice") {
    r = ops::dice(current, dice_of(req));
  } else if (op == "rollup") {
    const std::string dim = required(req, "dimension");
    require_hierarchy(current, dim);
    r = ops::roll_up(current, {dim, required(req, "level"), agg_of(req)});
  } else if (op == "drilldown") {
    const std::string dim = required(req, "dimension");
    require_hierarchy(current, dim);
    r = ops::drill_down(current, require_base(base), {dim, required(req, "level"), agg_of(req)});
  } else {
    auto lattice = ops::cube(current, agg_of(req));
    out.warnings = lattice.report.warnings;
    out.xml = serialize(lattice.data.front());
    out.lattice = std::move(lattice);
    return out;
  }
  out.warnings = r->report.warnings;
  out.xml = serialize(r->cube);
  out.cube = std::move(r->cube);
  return out;
}

oracle::Relation oracle_apply(const XolapCube& current, const XolapCube* base, const OpRequest& req) {
  check_op(req);
  const oracle::Relation in = oracle::flatten(current);
  const std::string& op = req.op;
  if (op == "rotate") return oracle::rotate(in, {split_commas(req.all("perm"))});
  if (op == "switch") return oracle::switch_members(in, swap_of(req));
  if (op == "push") return oracle::push(in, required(req, "dimension"));
  if (op == "pull") return oracle::pull(in, measure_of(current, req));
  if (op == "slice") return oracle::slice(in, slice_of(req));
  if (op == "dice") return oracle::dice(in, dice_of(req));
  if (op == "rollup") return oracle::roll_up(in, current.hierarchies, {required(req, "dimension"), required(req, "level"), agg_of(req)});
  if (op == "drilldown")
    return oracle::drill_down(in, oracle::flatten(require_base(base)), current.hierarchies,
                              {required(req, "dimension"), required(req, "level"), agg_of(req)});
  return oracle::cube(in, current.hierarchies, agg_of(req));
}

oracle::Diff oracle_check(const XolapCube& current, const XolapCube* base, const OpRequest& req,
                          const ApplyResult& result) {
  const oracle::Relation expected = oracle_apply(current, base, req);
  const oracle::Relation actual = result.lattice ? oracle::flatten(*result.lattice) : oracle::flatten(*result.cube);
  return oracle::compare(expected, actual, oracle::mode_for(req.op));
}

}  // namespace xolap
