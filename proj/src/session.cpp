#include "xolap/session.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "xolap/error.hpp"
#include "xolap/xml_io.hpp"

namespace xolap {

namespace fs = std::filesystem;

nlohmann::ordered_json schema_to_json(const CubeSchema& s) {
  nlohmann::ordered_json j;
  j["dims"] = s.dimensions;
  j["levels"] = s.leaf_tags();
  j["measure"] = s.measure ? nlohmann::ordered_json(*s.measure) : nlohmann::ordered_json(nullptr);
  j["fact_tag"] = s.fact_tag;
  j["collection_tag"] = s.collection_tag;
  j["level_of"] = s.level_of;
  j["pushed"] = s.pushed;
  return j;
}

CubeSchema schema_from_json(const nlohmann::json& j) {
  CubeSchema s;
  s.dimensions = j.at("dims").get<std::vector<std::string>>();
  if (!j.at("measure").is_null()) s.measure = j.at("measure").get<std::string>();
  s.fact_tag = j.at("fact_tag").get<std::string>();
  s.collection_tag = j.at("collection_tag").get<std::string>();
  s.level_of = j.at("level_of").get<std::map<std::string, std::string>>();
  s.pushed = j.at("pushed").get<std::vector<std::string>>();
  return s;
}

// ---------------------------------------------------------------------------

CubeSession::CubeSession(std::string id, XolapCube base) : id_(std::move(id)) {
  auto snap = std::make_shared<Snapshot>();
  snap->version = version_;
  snap->xml = serialize(base);
  snap->cube = std::move(base);
  stack_.push_back(std::move(snap));
}

SessionView CubeSession::view_locked() const { return {id_, version_, stack_.size(), stack_.back()}; }

SessionView CubeSession::view() const {
  std::lock_guard lock(mutex_);
  return view_locked();
}

std::vector<std::shared_ptr<const Snapshot>> CubeSession::history() const {
  std::lock_guard lock(mutex_);
  return stack_;
}

const XolapCube& CubeSession::base() const {
  // The bottom snapshot is never popped or replaced.
  return *stack_.front()->cube;
}

void CubeSession::check_version(std::optional<std::size_t> expected) const {
  if (expected && *expected != version_)
    throw Error(ErrorKind::Usage, "version-conflict",
                "expected version " + std::to_string(*expected) + ", session is at " + std::to_string(version_));
}

SessionView CubeSession::apply(const OpRequest& req, std::optional<std::size_t> expected_version) {
  std::lock_guard lock(mutex_);
  check_version(expected_version);
  const Snapshot& top = *stack_.back();
  if (!top.cube)
    throw Error(ErrorKind::Operator, "lattice-state", "the current state is a cube lattice; undo before applying operators");
  ApplyResult r = apply_request(*top.cube, stack_.front()->cube ? &*stack_.front()->cube : nullptr, req);
  auto snap = std::make_shared<Snapshot>();
  snap->version = version_ + 1;
  snap->request = req;
  snap->cube = std::move(r.cube);
  snap->lattice = std::move(r.lattice);
  snap->xml = std::move(r.xml);
  snap->warnings = std::move(r.warnings);
  stack_.push_back(std::move(snap));
  ++version_;
  if (persist_) persist_(id_, version_, stack_);
  return view_locked();
}

SessionView CubeSession::undo(std::optional<std::size_t> expected_version) {
  std::lock_guard lock(mutex_);
  check_version(expected_version);
  if (stack_.size() == 1) throw Error(ErrorKind::Usage, "undo-at-bottom", "nothing to undo: the session is at its base cube");
  stack_.pop_back();
  ++version_;
  if (persist_) persist_(id_, version_, stack_);
  return view_locked();
}

std::shared_ptr<CubeSession> CubeSession::restore(std::string id, std::size_t version,
                                                  std::vector<std::shared_ptr<const Snapshot>> stack) {
  if (stack.empty() || !stack.front()->cube)
    throw Error(ErrorKind::Validation, "bad-session", "persisted session '" + id + "' has no base cube");
  auto s = std::make_shared<CubeSession>(std::move(id), *stack.front()->cube);
  s->stack_ = std::move(stack);
  s->version_ = version;
  return s;
}

void CubeSession::set_persist_hook(PersistHook hook) {
  std::lock_guard lock(mutex_);
  persist_ = std::move(hook);
}

// ---------------------------------------------------------------------------

namespace {

std::string random_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  std::ostringstream os;
  os << std::hex << rng();
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Usage, "io-error", "cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Usage, "io-error", "cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, p);
}

void write_session(const fs::path& dir, const std::string& id, std::size_t version,
                   const std::vector<std::shared_ptr<const Snapshot>>& stack) {
  fs::create_directories(dir);
  nlohmann::ordered_json j;
  j["id"] = id;
  j["version"] = version;
  nlohmann::ordered_json hs = nlohmann::ordered_json::object();
  for (const auto& [dim, h] : stack.front()->cube->hierarchies) hs[dim] = serialize(h);
  j["hierarchies"] = hs;
  j["stack"] = nlohmann::ordered_json::array();
  for (const auto& snap : stack) {
    const std::string file = "v" + std::to_string(snap->version) + ".xml";
    if (!fs::exists(dir / file)) write_file(dir / file, snap->xml);
    nlohmann::ordered_json e;
    e["version"] = snap->version;
    e["request"] = snap->request ? snap->request->to_json() : nlohmann::ordered_json(nullptr);
    e["kind"] = snap->cube ? "cube" : "lattice";
    e["schema"] = schema_to_json(snap->cube ? snap->cube->schema : snap->lattice->schema);
    e["file"] = file;
    e["warnings"] = snap->warnings;
    j["stack"].push_back(std::move(e));
  }
  write_file(dir / "session.json", j.dump(2) + "\n");
}

std::shared_ptr<CubeSession> read_session(const fs::path& dir) {
  auto j = nlohmann::json::parse(read_file(dir / "session.json"));
  HierarchySet hs;
  for (const auto& [dim, xml] : j.at("hierarchies").items()) hs.emplace(dim, parse_hierarchy(xml.get<std::string>()));
  std::vector<std::shared_ptr<const Snapshot>> stack;
  for (const auto& e : j.at("stack")) {
    auto snap = std::make_shared<Snapshot>();
    snap->version = e.at("version").get<std::size_t>();
    if (!e.at("request").is_null()) snap->request = OpRequest::from_json(e.at("request"));
    snap->xml = read_file(dir / e.at("file").get<std::string>());
    CubeSchema schema = schema_from_json(e.at("schema"));
    DataTree tree = parse_document(snap->xml);
    if (e.at("kind") == "cube") snap->cube = XolapCube{std::move(schema), {std::move(tree)}, hs};
    else snap->lattice = ops::CubeLattice{std::move(schema), {std::move(tree)}, {}};
    snap->warnings = e.at("warnings").get<std::vector<std::string>>();
    stack.push_back(std::move(snap));
  }
  return CubeSession::restore(j.at("id").get<std::string>(), j.at("version").get<std::size_t>(), std::move(stack));
}

}  // namespace

SessionStore::SessionStore(std::optional<fs::path> persist_dir) : dir_(std::move(persist_dir)) {
  if (dir_) load();
}

void SessionStore::attach(const std::shared_ptr<CubeSession>& session) {
  if (!dir_) return;
  fs::path dir = *dir_ / session->id();
  session->set_persist_hook([dir](const std::string& id, std::size_t version, const auto& stack) {
    write_session(dir, id, version, stack);
  });
}

void SessionStore::load() {
  if (!fs::exists(*dir_)) return;
  for (const auto& entry : fs::directory_iterator(*dir_)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "session.json")) continue;
    auto s = read_session(entry.path());
    attach(s);
    sessions_[s->id()] = s;
  }
}

std::shared_ptr<CubeSession> SessionStore::create(XolapCube base) {
  auto s = std::make_shared<CubeSession>(random_id(), std::move(base));
  attach(s);
  if (dir_) {
    auto v = s->view();
    write_session(*dir_ / s->id(), s->id(), v.version, s->history());
  }
  std::lock_guard lock(mutex_);
  sessions_[s->id()] = s;
  return s;
}

std::shared_ptr<CubeSession> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace xolap
