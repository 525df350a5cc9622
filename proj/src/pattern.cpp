#include "xolap/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "xolap/decimal.hpp"
#include "xolap/error.hpp"

namespace xolap {

Pid PatternTree::add_root(std::optional<std::string> tag, ValuePredicate value, bool keep) {
  if (!nodes_.empty()) throw Error(ErrorKind::Construction, "pattern-root", "pattern already has a root");
  nodes_.push_back(PatternNode{0, std::move(tag), std::move(value), keep, std::nullopt, Axis::ParentChild, {}});
  return 0;
}

Pid PatternTree::add_child(Pid parent, std::optional<std::string> tag, ValuePredicate value, bool keep,
                           Axis axis) {
  const Pid pid = nodes_.size();
  nodes_.at(parent).children.push_back(pid);
  nodes_.push_back(PatternNode{pid, std::move(tag), std::move(value), keep, parent, axis, {}});
  return pid;
}

std::vector<Pid> PatternTree::preorder() const {
  std::vector<Pid> out;
  if (nodes_.empty()) return out;
  std::vector<Pid> stack{root()};
  while (!stack.empty()) {
    Pid p = stack.back();
    stack.pop_back();
    out.push_back(p);
    const auto& ch = nodes_[p].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

PatternTree PatternTree::with_keep(std::span<const Pid> pids) const {
  PatternTree copy = *this;
  for (auto& n : copy.nodes_) n.keep_subtree = std::find(pids.begin(), pids.end(), n.pid) != pids.end();
  return copy;
}

namespace {

bool compare_values(CompareOp op, const std::string& actual, const std::string& expected) {
  auto a = Decimal::parse(actual);
  auto b = Decimal::parse(expected);
  if (a && b) {
    switch (op) {
      case CompareOp::Less: return *a < *b;
      case CompareOp::LessEq: return *a <= *b;
      case CompareOp::Equal: return *a == *b;
      case CompareOp::GreaterEq: return *a >= *b;
      case CompareOp::Greater: return *a > *b;
    }
  }
  switch (op) {
    case CompareOp::LessEq:
    case CompareOp::Equal:
    case CompareOp::GreaterEq: return actual == expected;
    default: return false;
  }
}

}  // namespace

bool satisfies(const PatternNode& p, const Node& n) {
  if (p.tag && *p.tag != n.tag) return false;
  if (std::holds_alternative<AnyValue>(p.value)) return true;
  if (!n.value) return false;
  const std::string& v = *n.value;
  if (auto* eq = std::get_if<ValueEquals>(&p.value)) return v == eq->value;
  if (auto* in = std::get_if<ValueIn>(&p.value))
    return std::find(in->values.begin(), in->values.end(), v) != in->values.end();
  const auto& cmp = std::get<ValueCompare>(p.value);
  return compare_values(cmp.op, v, cmp.value);
}

std::vector<Embedding> match(const PatternTree& pattern, const DataTree& tree) {
  std::vector<Embedding> out;
  if (pattern.size() == 0 || tree.empty()) return out;
  const std::vector<Pid> order = pattern.preorder();
  std::vector<std::size_t> map(pattern.size());
  std::vector<bool> used(tree.size(), false);

  std::function<void(std::size_t)> extend = [&](std::size_t depth) {
    if (depth == order.size()) {
      out.push_back(Embedding{&tree, map});
      return;
    }
    const PatternNode& pn = pattern.node(order[depth]);
    auto try_node = [&](std::size_t d) {
      if (used[d] || !satisfies(pn, tree.node(d))) return;
      used[d] = true;
      map[pn.pid] = d;
      extend(depth + 1);
      used[d] = false;
    };
    if (!pn.parent) {
      for (std::size_t d = 0; d < tree.size(); ++d) try_node(d);
    } else if (pn.axis == Axis::ParentChild) {
      for (std::size_t d : tree.node(map[*pn.parent]).children) try_node(d);
    } else {
      const std::size_t anchor = map[*pn.parent];
      for (std::size_t d = anchor + 1; d < tree.subtree_end(anchor); ++d) try_node(d);
    }
  };
  extend(0);
  return out;
}

DataTree witness(const Embedding& e, const PatternTree& pattern) {
  const DataTree& src = *e.source;
  std::vector<bool> claimed(src.size(), false);
  for (std::size_t d : e.map) claimed[d] = true;

  std::function<NodeSpec(std::size_t, std::optional<Pid>, bool)> emit =
      [&](std::size_t d, std::optional<Pid> q, bool kept) {
        const Node& n = src.node(d);
        NodeSpec spec(n.tag, n.value);
        if (q) {
          for (Pid c : pattern.node(*q).children) spec.children.push_back(emit(e[c], c, false));
          kept = kept || pattern.node(*q).keep_subtree;
        }
        if (kept) {
          for (std::size_t k : n.children)
            if (!claimed[k]) spec.children.push_back(emit(k, std::nullopt, true));
        }
        return spec;
      };
  return build_tree(emit(e[PatternTree::root()], PatternTree::root(), false));
}

// ---------------------------------------------------------------------------
// Textual form

namespace {

class PatternParser {
 public:
  explicit PatternParser(std::string_view text) : text_(text) {}

  PatternTree parse() {
    skip_ws();
    if (consume("//") || consume("/")) {}
    parse_path(std::nullopt, Axis::ParentChild);
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return std::move(tree_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Parse, "pattern-syntax",
                "pattern syntax error at offset " + std::to_string(pos_) + ": " + what);
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool consume(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  bool at(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':';
  }
  std::string name() {
    skip_ws();
    std::size_t begin = pos_;
    while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
    if (begin == pos_) fail("expected a name");
    return std::string(text_.substr(begin, pos_ - begin));
  }
  Pid add(std::optional<Pid> parent, Axis axis, std::optional<std::string> tag) {
    return parent ? tree_.add_child(*parent, std::move(tag), AnyValue{}, false, axis)
                  : tree_.add_root(std::move(tag));
  }

  // Returns the pid of the path's first step.
  Pid parse_path(std::optional<Pid> parent, Axis axis) {
    Pid first = parse_step(parent, axis);
    Pid last = first;
    while (true) {
      Axis next;
      if (consume("//")) next = Axis::AncestorDescendant;
      else if (consume("/")) next = Axis::ParentChild;
      else break;
      if (at('(')) {
        parse_group(last, next);
        break;
      }
      last = parse_step(last, next);
    }
    return first;
  }

  void parse_group(Pid parent, Axis axis) {
    consume("(");
    std::vector<Pid> members;
    do {
      members.push_back(parse_path(parent, axis));
    } while (consume(","));
    if (!consume(")")) fail("expected ')'");
    if (consume("{keep}"))
      for (Pid m : members) tree_.set_keep(m, true);
  }

  Pid parse_step(std::optional<Pid> parent, Axis axis) {
    std::optional<std::string> tag;
    if (!consume("*")) tag = name();
    Pid pid = add(parent, axis, std::move(tag));
    while (consume("[")) parse_predicate(pid);
    if (consume("{keep}")) tree_.set_keep(pid, true);
    return pid;
  }

  std::string raw_until_bracket() {
    std::size_t end = text_.find(']', pos_);
    if (end == std::string_view::npos) fail("missing ']'");
    std::string v(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    auto b = v.find_first_not_of(" \t");
    auto e = v.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
  }

  ValuePredicate parse_value_predicate() {
    ValuePredicate pred;
    if (consume("<=")) pred = ValueCompare{CompareOp::LessEq, {}};
    else if (consume(">=")) pred = ValueCompare{CompareOp::GreaterEq, {}};
    else if (consume("<")) pred = ValueCompare{CompareOp::Less, {}};
    else if (consume(">")) pred = ValueCompare{CompareOp::Greater, {}};
    else if (consume("=")) pred = ValueEquals{};
    else if (consume("in ")) pred = ValueIn{};
    else fail("expected a comparison operator");
    std::string v = raw_until_bracket();
    if (auto* eq = std::get_if<ValueEquals>(&pred)) eq->value = v;
    else if (auto* cmp = std::get_if<ValueCompare>(&pred)) cmp->value = v;
    else {
      auto& in = std::get<ValueIn>(pred);
      std::size_t start = 0;
      while (true) {
        std::size_t bar = v.find('|', start);
        in.values.push_back(v.substr(start, bar - start));
        if (bar == std::string::npos) break;
        start = bar + 1;
      }
    }
    return pred;
  }

  void parse_predicate(Pid pid) {
    skip_ws();
    char c = pos_ < text_.size() ? text_[pos_] : '\0';
    if (c == '=' || c == '<' || c == '>' || text_.substr(pos_, 3) == "in ") {
      tree_.set_value_predicate(pid, parse_value_predicate());
      return;
    }
    std::string child_tag = name();
    tree_.add_child(pid, child_tag, parse_value_predicate());
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  PatternTree tree_;
};

}  // namespace

PatternTree parse_pattern(std::string_view text) { return PatternParser(text).parse(); }

}  // namespace xolap
