#pragma once

#include <cstdint>

#include "json.hpp"
#include "pivotmodel/engine.hpp"
#include "pivotmodel/data_io.hpp"
#include "pivotmodel/lint.hpp"
#include "pivotmodel/trace.hpp"
#include "pivotmodel/view.hpp"

namespace pivotmodel {

using Json = nlohmann::ordered_json;

// Numbers travel as JSON numbers, cell errors as their display text ("#DIV/0!").
Json to_json(CellValue v);

// Addresses travel as {"DIM": "member", ...}.
Json address_to_json(const ModelStructure& s, const CellAddress& address);
NamedAddress named_address_from_json(const Json& j);

// Accepts pages as {"DIM": "member"} or [["DIM", "member"], ...].
// Throws Error(parse) on a malformed document.
ViewSpec view_spec_from_json(const Json& j);
Json to_json(const ViewSpec& spec);
Json to_json(const ViewGrid& grid);

Json to_json(const CalcReport& report);
Json to_json(const LoadReport& report);
Json to_json(const ModelStats& stats, std::size_t rule_count);

Json structure_to_json(const ModelStructure& s);
Json rules_to_json(const RuleSet& rules);
Json lint_to_json(const ModelStructure& s, const std::vector<LintFinding>& findings);

// Rule references are resolved to names through `rules`.
Json to_json(const Cube& cube, const RuleSet& rules, const TraceNode& node);
Json to_json(const Cube& cube, const RuleSet& rules, const DecompositionReport& report);

}  // namespace pivotmodel
