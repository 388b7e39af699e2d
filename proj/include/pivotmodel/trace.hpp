#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pivotmodel/cube.hpp"
#include "pivotmodel/rule_set.hpp"

namespace pivotmodel {

// Indices of the enabled rules whose scope contains the cell, in sequence
// order. The last one is the rule whose result the cell holds.
std::vector<std::size_t> applicable_rules(const RuleSet& rules, const ModelStructure& structure,
                                          const CellAddress& address);

struct TraceNode {
  std::string label;  // "L1", "L1.2", "L1.1.2.4" ...
  CellAddress address;
  CellValue value;
  Provenance provenance;
  std::optional<std::size_t> rule;  // rule index drilled (parent) or winning rule (child)
  std::string rule_text;
  bool winning_rule = false;
  std::vector<TraceNode> children;  // one per member reference, left to right
};

// One level of trace precedence. `rule` defaults to the winning rule and must
// be applicable at the address. Data, pinned and empty cells without an
// explicit rule have no children.
TraceNode trace(const Cube& cube, const RuleSet& rules, const CellAddress& address,
                std::optional<std::size_t> rule = std::nullopt, std::string label = "L1");

// Drill into child `operand` (1-based) of the previous block, optionally
// along a rule other than the winner.
struct DrillStep {
  std::size_t operand = 1;
  std::optional<std::size_t> rule;
};

// Blocks for a drill path: the root, then one per step.
std::vector<TraceNode> drill_path(const Cube& cube, const RuleSet& rules, const CellAddress& root,
                                  std::optional<std::size_t> root_rule, std::span<const DrillStep> steps);

// Blocks for every node with children, following winning rules, down to
// `depth` levels (1 = root block only). Pre-order.
std::vector<TraceNode> drill_winning(const Cube& cube, const RuleSet& rules, const CellAddress& root,
                                     std::size_t depth);

// Each block is the drilled node's row followed by its children's rows;
// columns Level, one per dimension, Value, Rule; blocks separated by a blank row.
std::string export_trace_csv(const ModelStructure& structure, std::span<const TraceNode> blocks);

// "L1.1.2.4" -> {1, 2, 4}: the operand positions taken below the root.
std::vector<std::size_t> parse_trace_label(std::string_view label);

// Agreement within relative 1e-9, or absolute 1e-12 near zero; errors agree
// only with the same error.
bool values_agree(CellValue a, CellValue b) noexcept;

struct RuleDecomposition {
  std::size_t rule = 0;
  CellValue value;
  bool agrees = true;
  bool winner = false;
};

struct DecompositionReport {
  CellAddress address;
  CellValue stored;
  std::vector<RuleDecomposition> rules;

  bool consistent() const noexcept;
};

// Re-evaluates the cell under each applicable rule against the current cube.
DecompositionReport decomposition_check(const Cube& cube, const RuleSet& rules, const CellAddress& address);

// Reports for cells where some applicable rule disagrees with the stored value.
std::vector<DecompositionReport> model_audit(const Cube& cube, const RuleSet& rules);

// Parent/child tables (1-based child ordinal, parent ordinal, 0 = none) per
// dimension, then the rules in sequence under folder headings.
std::string export_docs_csv(const ModelStructure& structure, const RuleSet& rules);
std::string render_docs_text(const ModelStructure& structure, const RuleSet& rules);

}  // namespace pivotmodel
