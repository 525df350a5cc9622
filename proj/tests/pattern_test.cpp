#include <gtest/gtest.h>

#include "support.hpp"
#include "xolap/error.hpp"
#include "xolap/pattern.hpp"
#include "xolap/xml_io.hpp"

namespace xolap {
namespace {

DataTree sales_doc() { return parse_document(testing::read_text(testing::data_path("sales.xml"))); }

std::vector<std::string> values(const std::vector<Embedding>& es, Pid p) {
  std::vector<std::string> out;
  for (const auto& e : es) out.push_back(e.node(p).value.value_or(""));
  return out;
}

TEST(PatternParse, StepsPredicatesAndKeep) {
  PatternTree p = parse_pattern("/sale{keep}/city[=Lyon]");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.node(0).tag, "sale");
  EXPECT_TRUE(p.node(0).keep_subtree);
  EXPECT_EQ(p.node(1).tag, "city");
  EXPECT_EQ(p.node(1).parent, 0u);
  ASSERT_TRUE(std::holds_alternative<ValueEquals>(p.node(1).value));
  EXPECT_EQ(std::get<ValueEquals>(p.node(1).value).value, "Lyon");
}

TEST(PatternParse, GroupsAxesAndChildPredicates) {
  PatternTree p = parse_pattern("sale/(product,city){keep}");
  ASSERT_EQ(p.size(), 3u);
  EXPECT_TRUE(p.node(1).keep_subtree);
  EXPECT_TRUE(p.node(2).keep_subtree);
  EXPECT_FALSE(p.node(0).keep_subtree);

  PatternTree q = parse_pattern("hierarchy//city[in Lyon|Paris]");
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q.node(1).axis, Axis::AncestorDescendant);
  EXPECT_EQ(std::get<ValueIn>(q.node(1).value).values, (std::vector<std::string>{"Lyon", "Paris"}));

  PatternTree r = parse_pattern("//department[num=69]");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.node(1).tag, "num");

  PatternTree w = parse_pattern("*/amount[>=5]");
  EXPECT_FALSE(w.node(0).tag);
  EXPECT_EQ(std::get<ValueCompare>(w.node(1).value).op, CompareOp::GreaterEq);
}

TEST(PatternParse, MalformedTextIsAParseError) {
  for (const char* bad : {"", "/", "sale[", "sale/(a,b", "sale{kep}", "sale[~1]"}) {
    try {
      parse_pattern(bad);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Parse) << bad;
    }
  }
}

TEST(PatternValues, NumericAndStringComparison) {
  Node n;
  n.tag = "amount";
  PatternNode p;
  p.value = ValueCompare{CompareOp::Less, "10"};
  n.value = "9.5";
  EXPECT_TRUE(satisfies(p, n));
  n.value = "10.0";
  EXPECT_FALSE(satisfies(p, n));
  p.value = ValueCompare{CompareOp::Equal, "10"};
  EXPECT_TRUE(satisfies(p, n));
  n.value = "abc";
  p.value = ValueCompare{CompareOp::Less, "x"};
  EXPECT_FALSE(satisfies(p, n));
  p.value = ValueCompare{CompareOp::LessEq, "abc"};
  EXPECT_TRUE(satisfies(p, n));
  n.value.reset();
  p.value = ValueEquals{""};
  EXPECT_FALSE(satisfies(p, n));
  p.tag = "city";
  p.value = AnyValue{};
  EXPECT_FALSE(satisfies(p, n));
}

TEST(Match, CountsOnTheFixture) {
  DataTree doc = sales_doc();
  EXPECT_EQ(match(parse_pattern("sale"), doc).size(), 5u);
  EXPECT_EQ(match(parse_pattern("sale/product[=Keyboard]"), doc).size(), 4u);
  EXPECT_EQ(match(parse_pattern("*"), doc).size(), 26u);
  EXPECT_EQ(match(parse_pattern("sales//amount[>4]"), doc).size(), 3u);
  EXPECT_EQ(match(parse_pattern("sales/amount"), doc).size(), 0u);
}

TEST(Match, DocumentOrder) {
  DataTree doc = sales_doc();
  auto es = match(parse_pattern("sale/(city,amount)"), doc);
  EXPECT_EQ(values(es, 1), (std::vector<std::string>{"Lyon", "Lyon", "Villeurbanne", "Paris", "Lyon"}));
  EXPECT_EQ(values(es, 2), (std::vector<std::string>{"10", "5", "7", "3", "4"}));
}

TEST(Match, EmbeddingsAreInjective) {
  DataTree t = build_tree(NodeSpec("a", std::nullopt, {NodeSpec("b", "1"), NodeSpec("b", "2")}));
  auto es = match(parse_pattern("a/(b,b)"), t);
  ASSERT_EQ(es.size(), 2u);
  EXPECT_EQ(es[0][1], 1u);
  EXPECT_EQ(es[0][2], 2u);
  EXPECT_EQ(es[1][1], 2u);
  EXPECT_EQ(es[1][2], 1u);
}

TEST(Witness, PatternOrderThenKeptChildren) {
  DataTree doc = sales_doc();
  auto es = match(parse_pattern("sale/(amount,city)"), doc);
  DataTree w = witness(es[0], parse_pattern("sale/(amount,city)"));
  EXPECT_TRUE(structural_eq(w, build_tree(NodeSpec("sale", std::nullopt, {NodeSpec("amount", "10"), NodeSpec("city", "Lyon")}))));

  PatternTree kept = parse_pattern("sale{keep}/(amount,city)");
  DataTree wk = witness(match(kept, doc)[1], kept);
  EXPECT_TRUE(structural_eq(
      wk, build_tree(NodeSpec("sale", std::nullopt,
                              {NodeSpec("amount", "5"), NodeSpec("city", "Lyon"), NodeSpec("product", "Mouse"),
                               NodeSpec("year", "2006")}))));
}

TEST(Witness, DescendantEdgesNestUnderTheImageOfTheParent) {
  DataTree doc = sales_doc();
  PatternTree p = parse_pattern("sales//city[=Paris]");
  auto es = match(p, doc);
  ASSERT_EQ(es.size(), 1u);
  EXPECT_TRUE(structural_eq(witness(es[0], p),
                            build_tree(NodeSpec("sales", std::nullopt, {NodeSpec("city", "Paris")}))));
}

TEST(Match, AgreesWithBruteForce) {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 300; ++i) {
    DataTree t = testing::random_tree(rng);
    PatternTree p = testing::random_pattern(rng);
    ASSERT_EQ(match(p, t).size(), testing::brute_force_embeddings(p, t)) << "instance " << i;
  }
}

}  // namespace
}  // namespace xolap
