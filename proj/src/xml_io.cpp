#include "xolap/xml_io.hpp"

#include <algorithm>
#include <cctype>

#include "xolap/error.hpp"

namespace xolap {

namespace {

class XmlReader {
 public:
  explicit XmlReader(std::string_view text) : text_(text) {}

  bool saw_attribute() const { return saw_attribute_; }

  NodeSpec read_document() {
    skip_misc();
    if (!peek_is("<")) fail("expected root element");
    NodeSpec root = read_element();
    skip_misc();
    if (pos_ != text_.size()) fail("content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<long>(std::min(pos_, text_.size())), '\n'));
    throw Error(ErrorKind::Parse, "malformed-xml", "malformed XML at line " + std::to_string(line) + ": " + what);
  }
  bool peek_is(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  void skip_until(std::string_view end) {
    std::size_t at = text_.find(end, pos_);
    if (at == std::string_view::npos) fail("unterminated markup");
    pos_ = at + end.size();
  }
  // Prolog, comments, doctype and whitespace between markup.
  void skip_misc() {
    while (true) {
      skip_ws();
      if (peek_is("<?")) skip_until("?>");
      else if (peek_is("<!--")) skip_until("-->");
      else if (peek_is("<!DOCTYPE")) skip_until(">");
      else return;
    }
  }
  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':';
  }
  std::string read_name() {
    std::size_t begin = pos_;
    while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
    if (begin == pos_) fail("expected a name");
    return std::string(text_.substr(begin, pos_ - begin));
  }
  std::string decode(std::string_view raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out += raw[i];
        continue;
      }
      std::size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity");
      std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "amp") out += '&';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else fail("unsupported entity '&" + std::string(ent) + ";'");
      i = semi;
    }
    return out;
  }

  NodeSpec read_element() {
    ++pos_;  // '<'
    NodeSpec el(read_name());
    std::vector<NodeSpec> attributes;
    while (true) {
      skip_ws();
      if (peek_is("/>")) {
        pos_ += 2;
        el.children = std::move(attributes);
        return el;
      }
      if (peek_is(">")) {
        ++pos_;
        break;
      }
      std::string attr = read_name();
      skip_ws();
      if (!peek_is("=")) fail("expected '=' after attribute name");
      ++pos_;
      skip_ws();
      if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\'')) fail("expected quoted attribute value");
      char quote = text_[pos_++];
      std::size_t end = text_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      attributes.emplace_back(attr, decode(text_.substr(pos_, end - pos_)));
      saw_attribute_ = true;
      pos_ = end + 1;
    }

    el.children = std::move(attributes);
    std::vector<std::string> text_runs;
    std::string leaf_text;
    bool has_elements = false;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated element '" + el.tag + "'");
      if (peek_is("</")) {
        pos_ += 2;
        std::string closing = read_name();
        if (closing != el.tag) fail("mismatched closing tag '" + closing + "' for '" + el.tag + "'");
        skip_ws();
        if (!peek_is(">")) fail("expected '>'");
        ++pos_;
        break;
      }
      if (peek_is("<!--")) {
        skip_until("-->");
      } else if (peek_is("<![CDATA[")) {
        fail("CDATA sections are not supported");
      } else if (peek_is("<")) {
        has_elements = true;
        el.children.push_back(read_element());
      } else {
        std::size_t next = text_.find('<', pos_);
        if (next == std::string_view::npos) fail("unterminated element '" + el.tag + "'");
        std::string run = decode(text_.substr(pos_, next - pos_));
        pos_ = next;
        leaf_text += run;
        auto b = run.find_first_not_of(" \t\r\n");
        if (b != std::string::npos) text_runs.push_back(run.substr(b, run.find_last_not_of(" \t\r\n") - b + 1));
      }
    }
    if (text_runs.size() > 1) fail("mixed content in element '" + el.tag + "'");
    if (has_elements) {
      if (!text_runs.empty()) el.value = text_runs.front();
    } else if (!text_runs.empty()) {
      el.value = leaf_text;
    }
    return el;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  bool saw_attribute_ = false;
};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const std::string kDeclaration = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

// `attribute_count(i)` leading children of node i are written as attributes.
template <typename AttrCount>
void write_node(std::string& out, const DataTree& t, std::size_t i, std::size_t depth, AttrCount attribute_count) {
  const Node& n = t.node(i);
  const std::string indent(depth * 2, ' ');
  const std::size_t attrs = attribute_count(i);
  out += indent + "<" + n.tag;
  for (std::size_t a = 0; a < attrs; ++a) {
    const Node& an = t.node(n.children[a]);
    out += " " + an.tag + "=\"" + escape(an.value.value_or("")) + "\"";
  }
  if (n.children.size() == attrs) {
    if (n.value) out += ">" + escape(*n.value) + "</" + n.tag + ">\n";
    else out += "/>\n";
    return;
  }
  out += ">";
  if (n.value) out += escape(*n.value);
  out += "\n";
  for (std::size_t c = attrs; c < n.children.size(); ++c) write_node(out, t, n.children[c], depth + 1, attribute_count);
  out += indent + "</" + n.tag + ">\n";
}

}  // namespace

DataTree parse_document(std::string_view text) { return build_tree(XmlReader(text).read_document()); }

XolapCube parse_facts(std::string_view text) {
  XmlReader reader(text);
  DataTree doc = build_tree(reader.read_document());
  // Attributes are not part of the fact grammar.
  if (reader.saw_attribute())
    throw Error(ErrorKind::Parse, "unsupported-attribute", "fact documents may not carry XML attributes");
  const Node& root = doc.root_node();
  if (root.children.empty())
    throw Error(ErrorKind::Validation, "cannot-infer-schema", "cannot infer schema from an empty collection <" + root.tag + "/>");

  CubeSchema schema;
  schema.collection_tag = root.tag;
  const Node& first = doc.node(root.children.front());
  schema.fact_tag = first.tag;
  if (first.children.empty())
    throw Error(ErrorKind::Validation, "cannot-infer-schema", "first fact has no dimensions or measure");
  for (std::size_t i = 0; i + 1 < first.children.size(); ++i) schema.dimensions.push_back(doc.node(first.children[i]).tag);
  const Node& measure = doc.node(first.children.back());
  schema.measure = measure.tag;
  for (std::size_t c : measure.children) schema.pushed.push_back(doc.node(c).tag);
  if (schema.dimensions.empty())
    throw Error(ErrorKind::Validation, "cannot-infer-schema", "facts need at least one dimension");

  for (const auto& tag : {schema.collection_tag, schema.fact_tag})
    if (std::ranges::find(kReservedTags, tag) != std::end(kReservedTags))
      throw Error(ErrorKind::Validation, "reserved-tag", "tag '" + tag + "' is reserved");
  for (const auto& tag : schema.dimensions)
    if (std::ranges::find(kReservedTags, tag) != std::end(kReservedTags))
      throw Error(ErrorKind::Validation, "reserved-tag", "tag '" + tag + "' is reserved");

  XolapCube cube{std::move(schema), {}, {}};
  cube.data.push_back(std::move(doc));
  auto report = validate(cube);
  if (!report.ok()) {
    const auto& first_issue = report.issues.front();
    throw Error(ErrorKind::Validation, first_issue.code,
                "fact " + std::to_string(first_issue.fact_index) + ": " + first_issue.message);
  }
  return cube;
}

HierarchyTree parse_hierarchy(std::string_view text) { return HierarchyTree::from_tree(parse_document(text)); }

std::string serialize(const DataTree& tree) {
  std::string out = kDeclaration;
  if (!tree.empty()) write_node(out, tree, 0, 0, [](std::size_t) { return std::size_t{0}; });
  return out;
}

DataTree document_tree(const XolapCube& cube) {
  if (cube.data.size() == 1 && cube.data.front().root_node().tag == cube.schema.collection_tag)
    return cube.data.front();
  NodeSpec root(cube.schema.collection_tag);
  for (const auto& t : cube.data) root.children.push_back(to_spec(t));
  return build_tree(root);
}

std::string serialize(const XolapCube& cube) { return serialize(document_tree(cube)); }

std::string serialize(const HierarchyTree& h) {
  const DataTree& t = h.tree();
  std::vector<std::size_t> attrs(t.size(), 0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const Node& n = t.node(i);
    if (n.children.empty()) continue;
    const std::string& child_tag = t.node(n.children.back()).tag;
    std::size_t k = 0;
    while (k < n.children.size() && t.node(n.children[k]).tag != child_tag) ++k;
    attrs[i] = k;
  }
  std::string out = kDeclaration;
  write_node(out, t, 0, 0, [&](std::size_t i) { return attrs[i]; });
  return out;
}

}  // namespace xolap
