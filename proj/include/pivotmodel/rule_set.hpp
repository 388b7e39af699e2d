#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pivotmodel/binder.hpp"
#include "pivotmodel/structure.hpp"

namespace pivotmodel {

// A rule as written in the model file.
struct RuleSpec {
  std::string name;
  std::string dimension;
  std::string target;
  std::string formula;
  bool enabled = true;
  std::vector<std::pair<std::string, std::vector<std::string>>> filters;
  std::vector<std::string> folder;

  friend bool operator==(const RuleSpec&, const RuleSpec&) = default;
};

struct BoundRule {
  RuleSpec spec;
  std::size_t anchor = 0;
  std::size_t target = 0;
  BoundFormula formula;
  // Per dimension: nullopt = unrestricted, otherwise a membership mask.
  std::vector<std::optional<std::vector<bool>>> filters;

  bool enabled() const noexcept { return spec.enabled; }
  const std::string& name() const noexcept { return spec.name; }

  // True iff the rule writes this cell when enabled.
  bool covers(const ModelStructure& s, std::size_t linear) const noexcept;
  bool covers(const CellAddress& address) const noexcept;

  // Formula in canonical business-term text, e.g. "{Total sales} - {Discounts and allowances}".
  std::string display_text() const { return to_string(formula.source); }
};

// Binds one rule; errors are prefixed with the rule name.
BoundRule bind_rule(const RuleSpec& spec, const ModelStructure& structure);

// Per dimension and member: true when no enabled rule targets the member.
using LeafMask = std::vector<std::vector<bool>>;

// Ordered rule list. Position i has sequence i + 1.
class RuleSet {
 public:
  RuleSet() = default;

  // Binds in document order. Errors name the rule and its 1-based position.
  static RuleSet bind(std::span<const RuleSpec> specs, const ModelStructure& structure);

  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }
  const BoundRule& operator[](std::size_t index) const { return rules_.at(index); }
  std::span<const BoundRule> rules() const noexcept { return rules_; }
  std::size_t enabled_count() const noexcept;

  // Index of the rule with this name (case-insensitive); throws not_found,
  // or validation when several rules share it.
  std::size_t index_of(std::string_view name) const;

  // permutation[i] is the old index of the rule placed at position i.
  RuleSet reordered(std::span<const std::size_t> permutation) const;
  RuleSet with_enabled(std::size_t index, bool enabled) const;
  RuleSet with_rule(BoundRule rule) const;

  std::vector<RuleSpec> specs() const;

  LeafMask leaf_mask(const ModelStructure& structure) const;

 private:
  std::vector<BoundRule> rules_;
};

bool is_input_eligible(const LeafMask& leaves, const CellAddress& address) noexcept;
bool is_input_eligible(const LeafMask& leaves, const ModelStructure& s, std::size_t linear) noexcept;

struct ModelStats {
  std::size_t total_cells = 0;
  std::size_t input_cells = 0;
  std::size_t calculated_cells = 0;
};

// input = product over dimensions of the leaf count.
ModelStats stats(const ModelStructure& structure, const RuleSet& rules);

}  // namespace pivotmodel
