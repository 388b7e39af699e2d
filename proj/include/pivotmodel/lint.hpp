#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pivotmodel/rule_set.hpp"

namespace pivotmodel {

enum class FindingKind {
  uncovered_aggregate,  // hierarchy parent that no enabled rule computes
  shadowed_rule,        // same target as a later rule with overlapping filters
  self_reference,       // formula can read a cell inside its own scope
};

std::string_view to_string(FindingKind kind) noexcept;

struct LintFinding {
  FindingKind kind;
  std::string message;
  std::size_t dimension = 0;
  std::optional<std::size_t> member;
  std::vector<std::size_t> rules;  // rule indices involved, ascending
};

std::vector<LintFinding> coverage_lint(const ModelStructure& structure, const RuleSet& rules);

// True iff some evaluation of the rule reads a cell the rule itself writes.
bool is_self_referential(const BoundRule& rule);

}  // namespace pivotmodel
