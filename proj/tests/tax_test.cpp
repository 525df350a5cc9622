#include <gtest/gtest.h>

#include "support.hpp"
#include "xolap/error.hpp"
#include "xolap/tax.hpp"
#include "xolap/xml_io.hpp"

namespace xolap::tax {
namespace {

TreeCollection sales() { return {parse_document(testing::read_text(testing::data_path("sales.xml")))}; }

NodeSpec fact(std::string city, std::string product, std::string year, std::string amount) {
  return NodeSpec("sale", std::nullopt,
                  {NodeSpec("city", city), NodeSpec("product", product), NodeSpec("year", year),
                   NodeSpec("amount", amount)});
}

std::vector<std::string> leaf_values(const TreeCollection& c, const std::string& tag) {
  std::vector<std::string> out;
  for (const auto& t : c)
    for (const auto& n : t.nodes())
      if (n.tag == tag && n.value) out.push_back(*n.value);
  return out;
}

void expect_tree(const DataTree& actual, const NodeSpec& expected) {
  EXPECT_TRUE(structural_eq(actual, build_tree(expected))) << serialize(actual);
}

TEST(Select, OneWitnessPerEmbeddingWithSelectedSubtrees) {
  PatternTree p = parse_pattern("sale/product[=Keyboard]");
  TreeCollection out = select(sales(), p, {0});
  ASSERT_EQ(out.size(), 4u);
  expect_tree(out[0], NodeSpec("sale", std::nullopt,
                               {NodeSpec("product", "Keyboard"), NodeSpec("city", "Lyon"), NodeSpec("year", "2006"),
                                NodeSpec("amount", "10")}));
  TreeCollection bare = select(sales(), p, {});
  expect_tree(bare[0], NodeSpec("sale", std::nullopt, {NodeSpec("product", "Keyboard")}));
  EXPECT_TRUE(select(sales(), parse_pattern("sale/product[=Tablet]"), {0}).empty());
}

TEST(Project, ListOrderAndNearestRetainedAncestor) {
  PatternTree p = parse_pattern("sales/sale/(city,amount)");
  TreeCollection out = project(sales(), p, {{1, false}, {3, false}, {2, false}});
  ASSERT_EQ(out.size(), 5u);
  expect_tree(out[2], NodeSpec("sale", std::nullopt, {NodeSpec("amount", "7"), NodeSpec("city", "Villeurbanne")}));

  TreeCollection loose = project(sales(), p, {{2, false}, {3, false}});
  ASSERT_EQ(loose.size(), 10u);
  expect_tree(loose[0], NodeSpec("city", "Lyon"));
  expect_tree(loose[1], NodeSpec("amount", "10"));

  TreeCollection kept = project(sales(), parse_pattern("sales/sale/city"), {{0, false}, {1, true}});
  ASSERT_EQ(kept.size(), 5u);
  EXPECT_EQ(kept[0].root_node().tag, "sales");
  EXPECT_EQ(kept[0].size(), 6u);
}

TEST(Product, WrapsTreesAndHandlesEmpty) {
  TreeCollection two{build_tree(NodeSpec("x", "1")), build_tree(NodeSpec("y"))};
  TreeCollection out = product(two, "bag");
  ASSERT_EQ(out.size(), 1u);
  expect_tree(out[0], NodeSpec("bag", std::nullopt, {NodeSpec("x", "1"), NodeSpec("y")}));
  TreeCollection empty = product({});
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(serialize(empty[0]), "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<sales/>\n");
}

TEST(Join, GraftsPartnersAndReportsMisses) {
  TreeCollection left{build_tree(fact("Lyon", "Keyboard", "2006", "10")), build_tree(fact("Nice", "Mouse", "2006", "1"))};
  TreeCollection right{parse_document(testing::read_text(testing::data_path("geo.xml")))};
  JoinSpec spec;
  spec.left = parse_pattern("sale{keep}/city");
  spec.right = parse_pattern("department/(num,city)");
  spec.links = {{1, 2}};
  spec.right_keep = {1};
  OperatorReport report;
  TreeCollection out = join(left, right, spec, &report);
  ASSERT_EQ(out.size(), 1u);
  expect_tree(out[0], NodeSpec("sale", std::nullopt,
                               {NodeSpec("city", "Lyon"), NodeSpec("product", "Keyboard"), NodeSpec("year", "2006"),
                                NodeSpec("amount", "10"), NodeSpec("num", "69")}));
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_NE(report.warnings[0].find("Nice"), std::string::npos);
}

TEST(Join, EmptyLinkListIsACrossProduct) {
  TreeCollection left{build_tree(NodeSpec("l", "1")), build_tree(NodeSpec("l", "2"))};
  TreeCollection right{build_tree(NodeSpec("r", "a")), build_tree(NodeSpec("r", "b")), build_tree(NodeSpec("r", "c"))};
  JoinSpec spec;
  spec.left = parse_pattern("l");
  spec.right = parse_pattern("r");
  spec.right_keep = {0};
  TreeCollection out = join(left, right, spec);
  ASSERT_EQ(out.size(), 6u);
  expect_tree(out[4], NodeSpec("l", "2", {NodeSpec("r", "b")}));
}

TEST(Group, KeysMembersAndOrder) {
  PatternTree p = parse_pattern("sale{keep}/(product,year)");
  TreeCollection out = group(sales(), p, {1, 2});
  ASSERT_EQ(out.size(), 3u);
  std::vector<std::size_t> sizes;
  for (const auto& g : out) {
    EXPECT_EQ(g.root_node().tag, "group");
    EXPECT_EQ(g.node(g.root_node().children[0]).tag, "group-by");
    sizes.push_back(g.root_node().children.size() - 1);
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 1, 1}));
  expect_tree(TreeCollection{build_tree(to_spec(out[0], out[0].root_node().children[0]))}[0],
              NodeSpec("group-by", std::nullopt, {NodeSpec("product", "Keyboard"), NodeSpec("year", "2006")}));

  OrderSpec desc;
  desc.keys = {{2, Direction::Descending, KeyKind::Numeric}};
  TreeCollection ordered = group(sales(), p, {1, 2}, desc, "bucket");
  EXPECT_EQ(ordered[0].root_node().tag, "bucket");
  EXPECT_EQ(leaf_values({build_tree(to_spec(ordered[0], 1))}, "year"), (std::vector<std::string>{"2007"}));

  TreeCollection all = group(sales(), p, {});
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].root_node().children.size(), 6u);
}

TEST(Aggregate, EvaluateFunctions) {
  std::vector<std::string> xs{"10", "5", "7.5"};
  EXPECT_EQ(evaluate_aggregate(AggFunction::Sum, xs), "22.5");
  EXPECT_EQ(evaluate_aggregate(AggFunction::Count, xs), "3");
  EXPECT_EQ(evaluate_aggregate(AggFunction::Avg, xs), "7.5");
  EXPECT_EQ(evaluate_aggregate(AggFunction::Min, xs), "5");
  EXPECT_EQ(evaluate_aggregate(AggFunction::Max, xs), "10");
  std::vector<std::string> none;
  EXPECT_EQ(evaluate_aggregate(AggFunction::Sum, none), "0");
  EXPECT_EQ(evaluate_aggregate(AggFunction::Count, none), "0");
  EXPECT_FALSE(evaluate_aggregate(AggFunction::Avg, none));
  EXPECT_FALSE(evaluate_aggregate(AggFunction::Max, none));
  std::vector<std::string> bad{"1", "x"};
  EXPECT_THROW(evaluate_aggregate(AggFunction::Sum, bad), Error);
  EXPECT_EQ(evaluate_aggregate(AggFunction::Count, bad), "2");
  std::vector<std::string> thirds{"1", "1", "2"};
  EXPECT_EQ(evaluate_aggregate(AggFunction::Avg, thirds), "1.33333333333");
}

TEST(Aggregate, ReplacesMeasuresWithOneResult) {
  TreeCollection groups = group(sales(), parse_pattern("sale{keep}/(product,year)"), {1, 2});
  PatternTree p = parse_pattern("group/sale/amount");
  TreeCollection out = aggregate(groups, p, 2, AggFunction::Sum, {AppendAggregate{0, "total"}});
  EXPECT_EQ(leaf_values(out, "total"), (std::vector<std::string>{"20", "5", "4"}));
  EXPECT_TRUE(leaf_values(out, "amount").empty());
}

TEST(Aggregate, EmptyInputsAndParameterErrors) {
  TreeCollection bare{build_tree(NodeSpec("group", std::nullopt, {NodeSpec("group-by")}))};
  PatternTree p = parse_pattern("group/sale/amount");
  TreeCollection summed = aggregate(bare, p, 2, AggFunction::Sum, {AppendAggregate{0, "total"}});
  expect_tree(summed[0], NodeSpec("group", std::nullopt, {NodeSpec("group-by"), NodeSpec("total", "0")}));
  OperatorReport report;
  TreeCollection avg = aggregate(bare, p, 2, AggFunction::Avg, {AppendAggregate{0, "total"}}, &report);
  EXPECT_TRUE(structural_eq(avg, bare));
  EXPECT_EQ(report.warnings.size(), 1u);
  EXPECT_THROW(aggregate(sales(), parse_pattern("sales/sale/amount"), 2, AggFunction::Sum, {SetValue{0, "x"}}), Error);
  EXPECT_EQ(parse_agg_function("avg"), AggFunction::Avg);
  EXPECT_EQ(to_string(AggFunction::Max), "max");
  try {
    parse_agg_function("median");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Usage);
  }
}

TEST(Reorder, StableSortWithinSiblingRuns) {
  PatternTree p = parse_pattern("sale/city");
  OrderSpec o;
  o.keys = {{1, Direction::Descending, KeyKind::Text}};
  TreeCollection out = reorder(sales(), p, o, {0});
  EXPECT_EQ(leaf_values(out, "city"), (std::vector<std::string>{"Villeurbanne", "Paris", "Lyon", "Lyon", "Lyon"}));
  EXPECT_EQ(leaf_values(out, "amount"), (std::vector<std::string>{"7", "3", "10", "5", "4"}));

  TreeCollection split = select(sales(), parse_pattern("sale{keep}"), {});
  TreeCollection roots = reorder(split, p, o, {0});
  EXPECT_EQ(leaf_values(roots, "city"), (std::vector<std::string>{"Villeurbanne", "Paris", "Lyon", "Lyon", "Lyon"}));
}

TEST(Reorder, RankFunction) {
  PatternTree p = parse_pattern("sale/amount");
  OrderSpec o;
  o.function_pid = 1;
  o.function = [](std::span<const std::string> v) {
    std::vector<std::size_t> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v.size() - i;
    return r;
  };
  TreeCollection out = reorder(sales(), p, o, {0});
  EXPECT_EQ(leaf_values(out, "amount"), (std::vector<std::string>{"4", "3", "7", "5", "10"}));
}

TEST(CopyPaste, AttachAndSetValue) {
  TreeCollection one{build_tree(fact("Lyon", "Keyboard", "2006", "10"))};
  TreeCollection attached = copy_paste(one, parse_pattern("sale/(year,amount)"), {1}, {AttachCopyUnder{2}});
  expect_tree(attached[0], NodeSpec("sale", std::nullopt,
                                    {NodeSpec("city", "Lyon"), NodeSpec("product", "Keyboard"), NodeSpec("year", "2006"),
                                     NodeSpec("amount", "10", {NodeSpec("year", "2006")})}));
  TreeCollection set = copy_paste(one, parse_pattern("sale/(city,product)"), {}, {SetValue{1, ValueOf{2}}});
  EXPECT_EQ(leaf_values(set, "city"), (std::vector<std::string>{"Keyboard"}));
  OperatorReport report;
  copy_paste(one, parse_pattern("sale/region"), {}, {SetValue{1, std::string("x")}}, &report);
  EXPECT_EQ(report.warnings.size(), 1u);
}

TEST(DeleteNodes, SubtreeSpliceAndRoot) {
  TreeCollection groups = group(sales(), parse_pattern("sale{keep}/(product,year)"), {1, 2});
  PatternTree p = parse_pattern("group/(group-by,sale)");
  TreeCollection out = delete_nodes(groups, p, {{1, DeleteMode::Splice}, {2, DeleteMode::WithSubtree}});
  expect_tree(out[1], NodeSpec("group", std::nullopt, {NodeSpec("product", "Mouse"), NodeSpec("year", "2006")}));
  EXPECT_TRUE(delete_nodes(sales(), parse_pattern("sales"), {{0, DeleteMode::WithSubtree}}).empty());
  EXPECT_EQ(delete_nodes(sales(), parse_pattern("sales"), {{0, DeleteMode::Splice}}).size(), 5u);
}

TEST(InsertNodes, PositionsAndValueSources) {
  TreeCollection one{build_tree(NodeSpec("sale", std::nullopt, {NodeSpec("city", "Lyon"), NodeSpec("amount", "10")}))};
  PatternTree p = parse_pattern("sale/city");
  TreeCollection out = insert_nodes(one, p,
                                    {{1, "department", ValueSource{std::string("69")}, InsertPosition::Before},
                                     {1, "echo", ValueSource{ValueOf{1}}, InsertPosition::After},
                                     {0, "first", std::nullopt, InsertPosition::FirstChild},
                                     {0, "last", std::nullopt, InsertPosition::LastChild}});
  expect_tree(out[0], NodeSpec("sale", std::nullopt,
                               {NodeSpec("first"), NodeSpec("department", "69"), NodeSpec("city", "Lyon"),
                                NodeSpec("echo", "Lyon"), NodeSpec("amount", "10"), NodeSpec("last")}));
}

TEST(Operators, AreNonDestructive) {
  TreeCollection in = sales();
  TreeCollection copy = in;
  select(in, parse_pattern("sale"), {0});
  delete_nodes(in, parse_pattern("sale/city"), {{1, DeleteMode::WithSubtree}});
  insert_nodes(in, parse_pattern("sale"), {{0, "x", std::nullopt, InsertPosition::LastChild}});
  EXPECT_TRUE(structural_eq(in, copy));
  TreeCollection out = select(in, parse_pattern("sale{keep}"), {});
  for (const auto& n : out[0].nodes())
    for (const auto& m : in[0].nodes()) EXPECT_NE(n.id, m.id);
}

TEST(TraceScope, RecordsNestedCalls) {
  TraceScope outer;
  product({});
  {
    TraceScope inner;
    select(sales(), parse_pattern("sale"), {});
    EXPECT_EQ(inner.calls(), (std::vector<std::string>{"select"}));
  }
  EXPECT_EQ(outer.calls(), (std::vector<std::string>{"product", "select"}));
}

}  // namespace
}  // namespace xolap::tax
