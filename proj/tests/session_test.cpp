#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "support.hpp"
#include "xolap/error.hpp"
#include "xolap/session.hpp"

namespace xolap {
namespace {

namespace fs = std::filesystem;

template <typename F>
std::string error_code(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

OpRequest rollup() {
  OpRequest r;
  r.op = "rollup";
  r.set("dimension", "city").set("level", "department").set("agg", "sum");
  return r;
}

TEST(OpRequest, JsonRoundTrip) {
  OpRequest r = rollup();
  r.add("where", "a=1").add("where", "b=2");
  auto j = r.to_json();
  EXPECT_EQ(j["op"], "rollup");
  EXPECT_EQ(j["level"], "department");
  EXPECT_TRUE(j["where"].is_array());
  EXPECT_EQ(OpRequest::from_json(nlohmann::json::parse(j.dump())), r);
  OpRequest numeric = OpRequest::from_json(nlohmann::json::parse(R"({"op":"slice","where":["year=2006"],"member":2006})"));
  EXPECT_EQ(numeric.get("member"), "2006");
  EXPECT_EQ(error_code([] { OpRequest::from_json(nlohmann::json::parse("[1]")); }), "bad-request");
  EXPECT_EQ(error_code([] { OpRequest::from_json(nlohmann::json::parse(R"({"dimension":"x"})")); }), "bad-request");
  EXPECT_EQ(error_code([] { OpRequest::from_json(nlohmann::json::parse(R"({"op":"slice","where":{"a":1}})")); }),
            "bad-request");
}

TEST(ApplyRequest, ParameterErrorsAreUsageErrors) {
  XolapCube c = testing::fixture_cube();
  auto usage = [&](OpRequest r) {
    try {
      apply_request(c, &c, r);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Usage) << e.what();
      return e.code();
    }
    return std::string();
  };
  EXPECT_EQ(usage(OpRequest{"explode", {}}), "unknown-op");
  EXPECT_EQ(usage(OpRequest{"rollup", {{"dimension", {"city"}}}}), "missing-parameter");
  EXPECT_EQ(usage(OpRequest{"slice", {{"where", {"product"}}}}), "bad-where");
  EXPECT_EQ(usage(OpRequest{"slice", {{"where", {"product=Mouse", "city=Lyon"}}}}), "slice-one-dimension");
  EXPECT_EQ(usage(OpRequest{"switch", {{"dimension", {"city"}}, {"member", {"Lyon"}}}}), "missing-parameter");
  EXPECT_EQ(usage(OpRequest{"cube", {{"agg", {"median"}}}}), "unknown-agg");
  XolapCube bare = load_cube(testing::read_text(testing::data_path("sales.xml")), {});
  EXPECT_EQ(error_code([&] { apply_request(bare, &bare, rollup()); }), "missing-hierarchy");
  OpRequest drill{"drilldown", {{"dimension", {"city"}}, {"level", {"city"}}}};
  EXPECT_EQ(error_code([&] { apply_request(c, nullptr, drill); }), "missing-base");
}

TEST(ApplyRequest, EveryOperatorAgreesWithTheOracleOnTheFixture) {
  XolapCube c = testing::fixture_cube();
  auto up = apply_request(c, &c, rollup());
  std::vector<std::pair<const XolapCube*, OpRequest>> cases{
      {&c, OpRequest{"rotate", {{"perm", {"year,product,city"}}}}},
      {&c, OpRequest{"switch", {{"dimension", {"product"}}, {"member", {"Mouse", "Keyboard"}}}}},
      {&c, OpRequest{"push", {{"dimension", {"product"}}}}},
      {&c, OpRequest{"pull", {}}},
      {&c, OpRequest{"slice", {{"where", {"product=Keyboard"}}}}},
      {&c, OpRequest{"dice", {{"where", {"city=Lyon", "year=2006"}}}}},
      {&c, rollup()},
      {&*up.cube, OpRequest{"drilldown", {{"dimension", {"city"}}, {"level", {"city"}}, {"agg", {"count"}}}}},
      {&c, OpRequest{"cube", {{"agg", {"min"}}}}},
  };
  for (const auto& [input, req] : cases) {
    ApplyResult r = apply_request(*input, &c, req);
    EXPECT_TRUE(oracle_check(*input, &c, req, r).empty()) << req.op << "\n" << oracle_check(*input, &c, req, r).str();
    EXPECT_EQ(r.xml.rfind("<?xml", 0), 0u);
  }
}

TEST(Session, ApplyUndoAndVersions) {
  CubeSession s("s1", testing::fixture_cube());
  auto v0 = s.view();
  EXPECT_EQ(v0.version, 1u);
  EXPECT_EQ(v0.depth, 1u);
  auto v1 = s.apply(rollup(), 1);
  EXPECT_EQ(v1.version, 2u);
  EXPECT_EQ(v1.depth, 2u);
  EXPECT_EQ(to_cells(*v1.current->cube).size(), 4u);
  EXPECT_EQ(error_code([&] { s.apply(rollup(), 1); }), "version-conflict");
  auto v2 = s.undo();
  EXPECT_EQ(v2.version, 3u);
  EXPECT_EQ(v2.current, v0.current);
  EXPECT_EQ(error_code([&] { s.undo(); }), "undo-at-bottom");
  EXPECT_EQ(s.view().version, 3u);
  EXPECT_EQ(s.history().size(), 1u);
}

TEST(Session, LatticeStateIsTerminal) {
  CubeSession s("s2", testing::fixture_cube());
  s.apply(OpRequest{"cube", {}});
  EXPECT_TRUE(s.view().current->lattice);
  EXPECT_EQ(error_code([&] { s.apply(rollup()); }), "lattice-state");
  s.undo();
  EXPECT_NO_THROW(s.apply(rollup()));
}

TEST(Session, FailedOperationLeavesStateUnchanged) {
  CubeSession s("s3", testing::fixture_cube());
  OpRequest bad{"rollup", {{"dimension", {"city"}}, {"level", {"region"}}}};
  EXPECT_EQ(error_code([&] { s.apply(bad); }), "unknown-level");
  EXPECT_EQ(s.view().version, 1u);
  EXPECT_EQ(s.view().depth, 1u);
}

TEST(Session, ConcurrentMutationsAreSerialized) {
  CubeSession s("s4", testing::fixture_cube());
  OpRequest swap{"switch", {{"dimension", {"city"}}, {"member", {"Lyon", "Paris"}}}};
  std::atomic<int> ok{0}, conflicts{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      for (int k = 0; k < 10; ++k) {
        s.apply(swap);
        try {
          s.apply(swap, 1);
          ++ok;
        } catch (const Error&) {
          ++conflicts;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  auto v = s.view();
  EXPECT_EQ(v.depth, 81u + static_cast<std::size_t>(ok.load()));
  EXPECT_EQ(v.version, v.depth);
  EXPECT_EQ(ok + conflicts, 80);
  auto h = s.history();
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_EQ(h[i]->version, h[i - 1]->version + 1);
}

TEST(SessionStore, PersistsAndReloads) {
  fs::path dir = fs::temp_directory_path() / ("xolap-store-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  std::string id;
  std::string rolled_xml;
  {
    SessionStore store(dir);
    auto s = store.create(testing::fixture_cube());
    id = s->id();
    s->apply(rollup());
    s->apply(OpRequest{"slice", {{"where", {"product=Keyboard"}}}});
    s->undo();
    rolled_xml = s->view().current->xml;
    EXPECT_TRUE(fs::exists(dir / id / "session.json"));
  }
  {
    SessionStore store(dir);
    ASSERT_EQ(store.size(), 1u);
    auto s = store.find(id);
    ASSERT_TRUE(s);
    auto v = s->view();
    EXPECT_EQ(v.version, 4u);
    EXPECT_EQ(v.depth, 2u);
    EXPECT_EQ(v.current->xml, rolled_xml);
    EXPECT_EQ(v.current->request, rollup());
    auto down = s->apply(OpRequest{"drilldown", {{"dimension", {"city"}}, {"level", {"city"}}}});
    EXPECT_EQ(to_cells(*down.current->cube).size(), 5u);
    s->apply(OpRequest{"cube", {}});
  }
  {
    SessionStore store(dir);
    auto s = store.find(id);
    ASSERT_TRUE(s);
    EXPECT_TRUE(s->view().current->lattice);
    EXPECT_EQ(s->view().depth, 4u);
  }
  EXPECT_FALSE(SessionStore(dir).find("missing"));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace xolap
