#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xolap/pattern.hpp"
#include "xolap/tree.hpp"

namespace xolap::tax {

/// Non-fatal diagnostics produced while an operator runs.
struct OperatorReport {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  void merge(const OperatorReport& other) {
    warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
  }
};

/// Records the names of algebra operators invoked on the current thread while
/// the scope is alive. Scopes nest; every active scope sees every call.
class TraceScope {
 public:
  TraceScope();
  ~TraceScope();
  TraceScope(const TraceScope&) = delete;
  TraceScope& operator=(const TraceScope&) = delete;

  const std::vector<std::string>& calls() const { return calls_; }

 private:
  friend void record_call(std::string_view op);
  std::vector<std::string> calls_;
  TraceScope* outer_;
};

void record_call(std::string_view op);

// ---------------------------------------------------------------------------
// Operator parameter types

using SelectionList = std::vector<Pid>;

struct ProjectionItem {
  Pid pid;
  bool keep_subtree = false;
};
/// Ordered; the order is the output sibling order.
using ProjectionList = std::vector<ProjectionItem>;

enum class Direction { Ascending, Descending };
enum class KeyKind { Text, Numeric };

struct OrderKey {
  Pid pid;
  Direction direction = Direction::Ascending;
  KeyKind kind = KeyKind::Text;
};

/// Order function over the key values of a sibling run, returning one sort
/// rank per value (stable sort by rank).
using RankFunction = std::function<std::vector<std::size_t>(std::span<const std::string>)>;

/// Either a list of key extractors or a rank function reading `function_pid`.
struct OrderSpec {
  std::vector<OrderKey> keys;
  std::optional<Pid> function_pid;
  RankFunction function;

  bool empty() const { return keys.empty() && !function_pid; }
};

using ReorderList = std::vector<Pid>;

/// Value of the node matched by `pid` in the current embedding.
struct ValueOf {
  Pid pid;
};
/// A literal string or a value read from a matched node.
using ValueSource = std::variant<std::string, ValueOf>;

struct AttachCopyUnder {
  Pid target;
};
struct SetValue {
  Pid target;
  ValueSource source;
};
struct AppendAggregate {
  Pid target;
  std::string result_tag;
};
using UpdateDirective = std::variant<AttachCopyUnder, SetValue, AppendAggregate>;
using UpdateSpec = std::vector<UpdateDirective>;

using CopyList = std::vector<Pid>;

enum class DeleteMode {
  WithSubtree,
  Splice  ///< remove the node only; its children take its place
};
struct DeleteTarget {
  Pid pid;
  DeleteMode mode = DeleteMode::WithSubtree;
};
using DeletionSpec = std::vector<DeleteTarget>;

enum class InsertPosition { FirstChild, LastChild, Before, After };
struct InsertDirective {
  Pid target;
  std::string tag;
  std::optional<ValueSource> value;
  InsertPosition position = InsertPosition::LastChild;
};
using InsertionSpec = std::vector<InsertDirective>;

using GroupingBasis = std::vector<Pid>;

enum class AggFunction { Sum, Count, Avg, Min, Max };

std::string_view to_string(AggFunction f);
/// Throws Error(Usage) for unknown names.
AggFunction parse_agg_function(std::string_view name);

/// ag over decimal literals. Returns nullopt for avg/min/max over no values.
/// Throws Error(Operator) on a non-numeric value unless ag is count.
std::optional<std::string> evaluate_aggregate(AggFunction ag, std::span<const std::string> values);

/// Equality of link values between the two sides of a join.
struct JoinLink {
  Pid left;
  Pid right;
};
/// Join pattern pair. An empty link list joins every pair.
struct JoinSpec {
  PatternTree left;
  PatternTree right;
  std::vector<JoinLink> links;
  SelectionList right_keep;  ///< right-side nodes grafted (with subtrees)
};

// ---------------------------------------------------------------------------
// Operators. All are pure: inputs are never modified and every output node is
// freshly allocated.

/// sigma: one witness tree per embedding; SL pids keep their subtrees.
TreeCollection select(const TreeCollection& c, const PatternTree& p, const SelectionList& sl);

/// pi: per embedding, only the listed nodes (plus kept subtrees). Retained
/// nodes nest under their nearest retained ancestor; siblings follow list
/// order. Retained nodes without a retained ancestor each start a tree.
TreeCollection project(const TreeCollection& c, const PatternTree& p, const ProjectionList& pl);

/// x: one tree, a fresh root over the roots of `c`.
TreeCollection product(const TreeCollection& c, std::string root_tag = "sales");

/// Per left embedding and matching right embedding: the left witness with the
/// right kept nodes grafted as last children of its root. Left embeddings
/// without a partner are dropped and reported.
TreeCollection join(const TreeCollection& left, const TreeCollection& right, const JoinSpec& spec,
                    OperatorReport* report = nullptr);

/// gamma: one tree per realized key combination, `root_tag(group-by(keys...),
/// members...)`. Groups appear in first-occurrence order, then stably sorted
/// by `o`; order keys refer to pids of the grouping basis.
TreeCollection group(const TreeCollection& c, const PatternTree& p, const GroupingBasis& g,
                     const OrderSpec& o = {}, std::string root_tag = "group");

/// A: per tree, removes every leaf matched by `measure` and appends one leaf
/// per AppendAggregate directive holding ag over the removed values.
TreeCollection aggregate(const TreeCollection& c, const PatternTree& p, Pid measure, AggFunction ag,
                         const UpdateSpec& us, OperatorReport* report = nullptr);

/// rho: subtrees matched by each RL pid are stably re-sorted by `o` among the
/// positions they occupy under their parent (or in the collection, for roots).
TreeCollection reorder(const TreeCollection& c, const PatternTree& p, const OrderSpec& o,
                       const ReorderList& rl);

/// kappa: deep copies of CL nodes attached per the update directives.
TreeCollection copy_paste(const TreeCollection& c, const PatternTree& p, const CopyList& cl,
                          const UpdateSpec& us, OperatorReport* report = nullptr);

/// delta: a tree whose root is deleted with its subtree leaves the collection.
TreeCollection delete_nodes(const TreeCollection& c, const PatternTree& p, const DeletionSpec& ds);

/// iota: one insertion per (embedding, directive).
TreeCollection insert_nodes(const TreeCollection& c, const PatternTree& p, const InsertionSpec& is);

}  // namespace xolap::tax
