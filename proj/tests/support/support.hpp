#pragma once

#include <memory>
#include <random>
#include <thread>
#include <string>
#include <vector>

#include "xolap/model.hpp"
#include "xolap/pattern.hpp"
#include "xolap/request.hpp"
#include "xolap/server.hpp"

namespace xolap::testing {

std::string data_path(const std::string& relative);
std::string read_text(const std::string& path);

/// sales.xml with geo.xml attached.
XolapCube fixture_cube();

struct RandomCubeLimits {
  std::size_t max_dims = 4;
  std::size_t max_members = 8;
  std::size_t max_facts = 200;
};

/// Facts plus 2-level hierarchies, as XML documents.
struct RandomCubeText {
  std::string facts;
  std::vector<std::string> hierarchies;
};

/// Dimensions d0..dk with members like `d1m3`; every dimension has a coarse
/// level `d<i>g` keyed by `code`. Measures are decimals with at most one
/// fractional digit.
RandomCubeText random_cube_text(std::mt19937_64& rng, const RandomCubeLimits& limits = {});
/// Loaded cube; half the time its data is split into one tree per fact.
XolapCube random_cube(std::mt19937_64& rng, const RandomCubeLimits& limits = {});

/// Distinct members of dimension `d` in first-occurrence order.
std::vector<std::string> members_of(const XolapCube& c, std::size_t d);

/// A valid random request for `op`. Drill-down requests expect the caller to
/// roll the cube up first (see `prepare`).
OpRequest random_request(std::mt19937_64& rng, const XolapCube& c, const std::string& op);

/// Input cube and base for running `req` on `c`; drill-down rolls `c` up to
/// the coarse level of the requested dimension first.
struct PreparedInput {
  XolapCube current;
  const XolapCube* base = nullptr;
};
PreparedInput prepare(const XolapCube& c, const OpRequest& req);

/// Trees over tags {a,b,c} with values from {1,2,x} or none.
DataTree random_tree(std::mt19937_64& rng, std::size_t max_nodes = 12);
/// Patterns over tags {a,b,c,any} with mixed axes and value predicates.
PatternTree random_pattern(std::mt19937_64& rng, std::size_t max_nodes = 4);
/// Counts injective embeddings by trying every map from pattern to tree nodes.
std::size_t brute_force_embeddings(const PatternTree& p, const DataTree& t);

/// In-process service on a free local port.
class ServerHarness {
 public:
  ServerHarness();
  ~ServerHarness();
  int port() const { return port_; }

 private:
  SessionStore store_;
  HttpService service_;
  int port_ = -1;
  std::thread thread_;
};

}  // namespace xolap::testing
