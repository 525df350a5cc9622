#pragma once

#include <string>
#include <string_view>

#include "xolap/model.hpp"
#include "xolap/tree.hpp"

namespace xolap {

/// Parses an element-only XML document. Attributes become leading leaf
/// children (used by hierarchy documents). Only the five predefined entities
/// are expanded. Throws Error(Parse, "malformed-xml") with a line number.
DataTree parse_document(std::string_view text);

/// Multidimensional fact document: one collection root over homogeneous
/// facts. Schema is inferred from the first fact (dimensions = its children
/// in order, measure = its last child). Throws Error(Validation) with the
/// first violation's code; "cannot-infer-schema" for an empty collection.
XolapCube parse_facts(std::string_view text);

/// Throws Error(Validation, "non-strict-hierarchy") for a member listed under
/// two parents.
HierarchyTree parse_hierarchy(std::string_view text);

/// Canonical form: XML declaration, 2-space indent, no attributes, newline at EOF.
std::string serialize(const DataTree& tree);
/// Facts wrapped under the collection tag unless the data already is one
/// collection-rooted tree.
std::string serialize(const XolapCube& cube);
/// Same canonical form; level attributes are written back as XML attributes.
std::string serialize(const HierarchyTree& h);

/// Tree form of a cube's data as a single document tree.
DataTree document_tree(const XolapCube& cube);

}  // namespace xolap
