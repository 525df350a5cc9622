#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xolap/request.hpp"

namespace xolap {

nlohmann::ordered_json schema_to_json(const CubeSchema& s);
CubeSchema schema_from_json(const nlohmann::json& j);

/// One immutable state on a session's stack.
struct Snapshot {
  std::size_t version = 0;               ///< session version when this state was pushed
  std::optional<OpRequest> request;      ///< nullopt for the base state
  std::optional<XolapCube> cube;
  std::optional<ops::CubeLattice> lattice;
  std::string xml;
  std::vector<std::string> warnings;
};

/// Session state returned to callers: the current snapshot and the session
/// version (which also advances on undo).
struct SessionView {
  std::string id;
  std::size_t version = 0;
  std::size_t depth = 0;
  std::shared_ptr<const Snapshot> current;
};

/// Base cube C0 plus an undo stack. Mutations are serialized per session.
///
/// Errors use Error(Usage) with codes "version-conflict", "undo-at-bottom";
/// applying an operator on a lattice state is Error(Operator, "lattice-state").
class CubeSession {
 public:
  /// Called under the session lock after every successful mutation.
  using PersistHook = std::function<void(const std::string& id, std::size_t version,
                                         const std::vector<std::shared_ptr<const Snapshot>>& stack)>;

  CubeSession(std::string id, XolapCube base);

  const std::string& id() const { return id_; }
  SessionView view() const;
  std::vector<std::shared_ptr<const Snapshot>> history() const;
  const XolapCube& base() const;

  SessionView apply(const OpRequest& req, std::optional<std::size_t> expected_version = std::nullopt);
  SessionView undo(std::optional<std::size_t> expected_version = std::nullopt);

  /// Rebuilds a session from a persisted stack.
  static std::shared_ptr<CubeSession> restore(std::string id, std::size_t version,
                                              std::vector<std::shared_ptr<const Snapshot>> stack);
  void set_persist_hook(PersistHook hook);

 private:
  SessionView view_locked() const;
  void check_version(std::optional<std::size_t> expected) const;

  std::string id_;
  mutable std::mutex mutex_;
  std::size_t version_ = 1;
  std::vector<std::shared_ptr<const Snapshot>> stack_;
  PersistHook persist_;
};

/// Session registry with optional directory-backed persistence: each session
/// gets a directory holding `v<version>.xml` snapshots and `session.json`.
class SessionStore {
 public:
  explicit SessionStore(std::optional<std::filesystem::path> persist_dir = std::nullopt);

  std::shared_ptr<CubeSession> create(XolapCube base);
  std::shared_ptr<CubeSession> find(const std::string& id) const;
  std::size_t size() const;

 private:
  void load();
  void attach(const std::shared_ptr<CubeSession>& session);

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<CubeSession>> sessions_;
};

}  // namespace xolap
