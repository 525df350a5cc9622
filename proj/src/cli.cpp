#include "xolap/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "xolap/error.hpp"
#include "xolap/request.hpp"
#include "xolap/server.hpp"
#include "xolap/xml_io.hpp"

namespace xolap {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Usage, "io-error", "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Usage: return kExitUsage;
    case ErrorKind::Parse:
    case ErrorKind::Validation: return kExitInvalidInput;
    case ErrorKind::Operator:
    case ErrorKind::Construction: return kExitOperator;
  }
  return kExitOperator;
}

struct Options {
  std::string facts;
  std::string op;
  std::vector<std::string> hierarchies;
  std::string dimension;
  std::string level;
  std::string agg;
  std::string perm;
  std::vector<std::string> members;
  std::vector<std::string> where;
  std::string measure;
  std::string out;
  std::string base;
  std::string pattern;
  bool oracle_check = false;

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string persist_dir;
};

OpRequest to_request(const Options& o) {
  OpRequest req;
  req.op = o.op;
  if (!o.dimension.empty()) req.set("dimension", o.dimension);
  if (!o.level.empty()) req.set("level", o.level);
  if (!o.agg.empty()) req.set("agg", o.agg);
  if (!o.perm.empty()) req.set("perm", o.perm);
  if (!o.measure.empty()) req.set("measure", o.measure);
  for (const auto& m : o.members) req.add("member", m);
  for (const auto& w : o.where) req.add("where", w);
  return req;
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Usage, "io-error", "cannot write '" + o.out + "'");
  f << text;
}

XolapCube load_input(const Options& o, const std::string& path) {
  std::vector<std::string> hs;
  for (const auto& h : o.hierarchies) hs.push_back(read_file(h));
  return load_cube(read_file(path), hs);
}

std::string render_relation(const oracle::Relation& r) {
  std::string s;
  for (std::size_t i = 0; i < r.columns.size(); ++i) s += (i ? "\t" : "") + r.columns[i];
  if (r.measure) s += "\t" + *r.measure;
  s += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.coordinates.size(); ++i) s += (i ? "\t" : "") + row.coordinates[i];
    if (row.measure) s += "\t" + *row.measure;
    s += "\n";
  }
  return s;
}

int run_select(const Options& o, std::ostream& out) {
  if (o.pattern.empty()) throw Error(ErrorKind::Usage, "missing-parameter", "select requires --pattern");
  if (o.oracle_check) throw Error(ErrorKind::Usage, "no-oracle", "select has no relational oracle");
  DataTree doc = parse_document(read_file(o.facts));
  PatternTree p = parse_pattern(o.pattern);
  TreeCollection result = tax::product(tax::select({doc}, p, {}), "result");
  emit(o, serialize(result.front()), out);
  return kExitOk;
}

int run_apply(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.facts.empty()) throw Error(ErrorKind::Usage, "missing-parameter", "--facts is required");
  if (o.op.empty()) throw Error(ErrorKind::Usage, "missing-parameter", "--op is required");
  if (o.op == "select") return run_select(o, out);
  if ((o.op == "rollup" || o.op == "drilldown") && o.hierarchies.empty())
    throw Error(ErrorKind::Usage, "missing-hierarchy", "--op " + o.op + " requires --hierarchy");

  XolapCube cube = load_input(o, o.facts);
  std::optional<XolapCube> base;
  if (o.op == "drilldown") base = o.base.empty() ? cube : load_input(o, o.base);
  const OpRequest req = to_request(o);
  ApplyResult r = apply_request(cube, base ? &*base : nullptr, req);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  emit(o, r.xml, out);
  if (o.oracle_check) {
    auto diff = oracle_check(cube, base ? &*base : nullptr, req, r);
    if (!diff.empty()) {
      err << "oracle mismatch (" << (oracle::mode_for(req.op) == oracle::CompareMode::Ordered ? "ordered" : "multiset")
          << "):\n" << diff.str();
      return kExitOracleMismatch;
    }
  }
  return kExitOk;
}

int run_oracle(const Options& o, std::ostream& out) {
  if (o.facts.empty() || o.op.empty()) throw Error(ErrorKind::Usage, "missing-parameter", "--facts and --op are required");
  XolapCube cube = load_input(o, o.facts);
  std::optional<XolapCube> base;
  if (o.op == "drilldown") base = o.base.empty() ? cube : load_input(o, o.base);
  emit(o, render_relation(oracle_apply(cube, base ? &*base : nullptr, to_request(o))), out);
  return kExitOk;
}

int run_serve(const Options& o, std::ostream& out) {
  std::optional<std::filesystem::path> dir;
  if (!o.persist_dir.empty()) dir = o.persist_dir;
  SessionStore store(dir);
  HttpService service(store);
  int port = service.bind(o.host, o.port);
  if (port < 0) throw Error(ErrorKind::Usage, "bind-failed", "cannot listen on " + o.host + ":" + std::to_string(o.port));
  out << "listening on http://" << o.host << ":" << port << std::endl;
  return service.serve() ? kExitOk : kExitUsage;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"XML-OLAP operators over a tree algebra", "xolap"};
  app.add_option("--facts", o.facts, "Fact document (XML)");
  app.add_option("--op", o.op, "rotate|switch|push|pull|slice|dice|rollup|drilldown|cube|select");
  app.add_option("--hierarchy", o.hierarchies, "Hierarchy document (repeatable)");
  app.add_option("--dimension", o.dimension, "Dimension name");
  app.add_option("--level", o.level, "Target hierarchy level");
  app.add_option("--agg", o.agg, "sum|count|avg|min|max (default sum)");
  app.add_option("--perm", o.perm, "Comma-separated dimension order");
  app.add_option("--member", o.members, "Member value (repeatable)")->allow_extra_args(false);
  app.add_option("--where", o.where, "DIMENSION=VALUE (repeatable)")->allow_extra_args(false);
  app.add_option("--measure", o.measure, "Measure to pull");
  app.add_option("--out", o.out, "Output file (default stdout)");
  app.add_option("--base", o.base, "Base cube C0 for drilldown (default --facts)");
  app.add_option("--pattern", o.pattern, "Pattern for --op select");
  app.add_flag("--oracle-check", o.oracle_check, "Compare the result against the relational oracle");

  auto* oracle_cmd = app.add_subcommand("oracle", "Evaluate the operation relationally and print the table");
  oracle_cmd->fallthrough();
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--port", o.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--host", o.host, "Bind address");
  serve_cmd->add_option("--persist-dir", o.persist_dir, "Directory for session snapshots");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*serve_cmd) return run_serve(o, out);
    if (*oracle_cmd) return run_oracle(o, out);
    return run_apply(o, out, err);
  } catch (const Error& e) {
    err << "error[" << e.code() << "]: " << e.what() << "\n";
    if (e.kind() == ErrorKind::Usage) err << "run 'xolap --help' for usage\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOperator;
  }
}

}  // namespace xolap
