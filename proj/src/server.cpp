#include "xolap/server.hpp"

#include "httplib.h"
#include "xolap/error.hpp"
#include "xolap/xml_io.hpp"

namespace xolap {

using nlohmann::ordered_json;

namespace {

int status_for(const Error& e) {
  if (e.code() == "not-found") return 404;
  if (e.code() == "version-conflict") return 412;
  if (e.code() == "undo-at-bottom") return 409;
  if (e.kind() == ErrorKind::Usage) return 400;
  return 422;
}

std::string_view kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Operator: return "operator";
    case ErrorKind::Construction: return "construction";
  }
  return "unknown";
}

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump() + "\n", "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  ordered_json body;
  body["error"] = e.code();
  body["kind"] = kind_name(e.kind());
  body["message"] = e.what();
  send_json(res, status_for(e), body);
}

ordered_json cells_json(const Snapshot& snap) {
  ordered_json cells = ordered_json::array();
  if (snap.cube) {
    for (const auto& cell : to_cells(*snap.cube)) {
      ordered_json coords = ordered_json::object();
      for (const auto& [tag, member] : cell.coordinates) coords[tag] = member;
      ordered_json c;
      c["coordinates"] = coords;
      c["value"] = cell.value ? ordered_json(*cell.value) : ordered_json(nullptr);
      cells.push_back(std::move(c));
    }
  } else {
    const auto rel = oracle::flatten(*snap.lattice);
    for (const auto& row : rel.rows) {
      ordered_json coords = ordered_json::object();
      for (std::size_t i = 0; i < rel.columns.size(); ++i) coords[rel.columns[i]] = row.coordinates[i];
      ordered_json c;
      c["coordinates"] = coords;
      c["value"] = row.measure ? ordered_json(*row.measure) : ordered_json(nullptr);
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

const CubeSchema& schema_of(const Snapshot& snap) { return snap.cube ? snap.cube->schema : snap.lattice->schema; }

ordered_json state_json(const SessionView& v, bool with_cells) {
  const Snapshot& snap = *v.current;
  ordered_json j;
  j["id"] = v.id;
  j["version"] = v.version;
  j["depth"] = v.depth;
  j["kind"] = snap.cube ? "cube" : "lattice";
  j["schema"] = schema_to_json(schema_of(snap));
  ordered_json cells = cells_json(snap);
  j["cell_count"] = cells.size();
  if (with_cells) j["cells"] = std::move(cells);
  j["warnings"] = snap.warnings;
  j["xml"] = snap.xml;
  return j;
}

std::optional<std::size_t> expected_version(const httplib::Request& req, nlohmann::json* body) {
  std::optional<std::size_t> v;
  auto parse = [](const std::string& text) -> std::size_t {
    std::string t = text;
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    try {
      std::size_t used = 0;
      auto n = std::stoull(t, &used);
      if (used == t.size()) return n;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::Usage, "bad-version", "version precondition must be a number, got '" + text + "'");
  };
  if (req.has_header("If-Match")) v = parse(req.get_header_value("If-Match"));
  if (body && body->is_object() && body->contains("version")) {
    const auto& jv = (*body)["version"];
    v = jv.is_number_unsigned() ? jv.get<std::size_t>() : parse(jv.is_string() ? jv.get<std::string>() : jv.dump());
    body->erase("version");
  }
  return v;
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Usage, "bad-json", std::string("request body is not JSON: ") + e.what());
  }
}

}  // namespace

struct HttpService::Impl {
  SessionStore& store;
  httplib::Server server;

  explicit Impl(SessionStore& s) : store(s) { routes(); }

  std::shared_ptr<CubeSession> session(const httplib::Request& req) {
    auto s = store.find(req.matches[1]);
    if (!s) throw Error(ErrorKind::Usage, "not-found", "no session '" + std::string(req.matches[1]) + "'");
    return s;
  }

  template <typename F>
  static httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_error(res, Error(ErrorKind::Operator, "internal", e.what()));
      }
    };
  }

  void routes() {
    server.Get("/health", guarded([this](const httplib::Request&, httplib::Response& res) {
      ordered_json j;
      j["status"] = "ok";
      j["sessions"] = store.size();
      send_json(res, 200, j);
    }));

    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::string facts;
      std::vector<std::string> hierarchies;
      if (req.is_multipart_form_data()) {
        auto f = req.files.find("facts");
        if (f == req.files.end()) throw Error(ErrorKind::Usage, "missing-facts", "multipart field 'facts' is required");
        facts = f->second.content;
        for (const auto& key : {"hierarchy", "hierarchies"}) {
          auto [lo, hi] = req.files.equal_range(key);
          for (auto it = lo; it != hi; ++it) hierarchies.push_back(it->second.content);
        }
      } else {
        auto body = parse_body(req);
        if (!body.contains("facts") || !body["facts"].is_string())
          throw Error(ErrorKind::Usage, "missing-facts", "JSON field 'facts' (XML text) is required");
        facts = body["facts"].get<std::string>();
        if (body.contains("hierarchies"))
          for (const auto& h : body["hierarchies"]) hierarchies.push_back(h.get<std::string>());
      }
      auto s = store.create(load_cube(facts, hierarchies));
      ordered_json j = state_json(s->view(), false);
      send_json(res, 201, j);
    }));

    server.Get(R"(/sessions/([^/]+)/cube)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, state_json(session(req)->view(), true));
    }));

    server.Post(R"(/sessions/([^/]+)/ops)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session(req);
      auto body = parse_body(req);
      auto expected = expected_version(req, &body);
      auto view = s->apply(OpRequest::from_json(body), expected);
      send_json(res, 200, state_json(view, true));
    }));

    server.Post(R"(/sessions/([^/]+)/undo)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session(req);
      auto body = parse_body(req);
      auto view = s->undo(expected_version(req, &body));
      send_json(res, 200, state_json(view, true));
    }));

    server.Get(R"(/sessions/([^/]+)/history)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session(req);
      auto view = s->view();
      ordered_json entries = ordered_json::array();
      for (const auto& snap : s->history()) {
        ordered_json e;
        e["version"] = snap->version;
        e["request"] = snap->request ? snap->request->to_json() : ordered_json(nullptr);
        e["warnings"] = snap->warnings;
        entries.push_back(std::move(e));
      }
      ordered_json j;
      j["id"] = view.id;
      j["version"] = view.version;
      j["depth"] = view.depth;
      j["entries"] = std::move(entries);
      send_json(res, 200, j);
    }));
  }
};

HttpService::HttpService(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {}
HttpService::~HttpService() = default;

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpService::serve() { return impl_->server.listen_after_bind(); }

void HttpService::stop() { impl_->server.stop(); }

}  // namespace xolap
