#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pivotmodel/engine.hpp"
#include "pivotmodel/rule_set.hpp"
#include "pivotmodel/structure.hpp"

namespace pivotmodel {

inline constexpr int kFormatVersion = 1;

// The model file: structure plus ordered rules, before validation.
struct ModelDocument {
  StructureSpec structure;
  std::vector<RuleSpec> rules;
};

// Schema errors throw Error(parse) naming the offending field.
ModelDocument parse_model_document(std::string_view json_text);

// Canonical form: two-space indentation, fixed key order, optional fields
// (aliases, parent, format, filters, folder) omitted when empty.
std::string format_model_document(const ModelDocument& doc);

ModelDocument document_of(const ModelStructure& structure, const RuleSet& rules);

// Builds and binds. Rule order is document order.
Model build_model(const ModelDocument& doc);

Model load_model(const std::string& path);
void save_model(const std::string& path, const ModelStructure& structure, const RuleSet& rules);

}  // namespace pivotmodel
