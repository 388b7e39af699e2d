#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pivotmodel/cube.hpp"
#include "pivotmodel/rule_set.hpp"

namespace pivotmodel {

// Cells written by one rule during a pass.
struct RuleWrites {
  std::size_t sequence = 0;
  std::string name;
  std::size_t cells_written = 0;
};

struct CalcReport {
  std::vector<RuleWrites> rules;  // enabled rules, in sequence order
  std::size_t cells_written = 0;  // sum over rules
  // Writes landing on a cell an earlier rule already wrote in this pass, so
  // cells_written - overwrites == number of RULE cells afterwards.
  std::size_t overwrites = 0;
  std::size_t contested_cells = 0;  // cells written by two or more rules
  std::size_t skipped_pinned = 0;
  double duration_ms = 0.0;
};

// Linear indices of every cell the rule writes: anchor coordinate fixed at the
// target, other dimensions ranging over their filters, in lexicographic order.
std::vector<std::size_t> scope_indices(const BoundRule& rule, const ModelStructure& structure);
std::vector<CellAddress> rule_scope(const BoundRule& rule, const ModelStructure& structure);
std::size_t scope_size(const BoundRule& rule, const ModelStructure& structure) noexcept;

// Full recalculation. Previous RULE cells are reset to EMPTY, then each enabled
// rule runs in sequence order: every cell in its scope is evaluated against the
// cube as it stood when the rule started, and the results are committed
// together. Pinned (OVERRIDE) cells are skipped. Later rules overwrite earlier
// ones on shared cells.
CalcReport apply_rules(Cube& cube, const RuleSet& rules);

struct CellWrite {
  CellAddress address;
  double value = 0.0;
};

// Stores input values as DATA and recalculates. All cells are validated before
// anything is written: each must be input-eligible and finite.
CalcReport write_back(Cube& cube, const RuleSet& rules, std::span<const CellWrite> cells, std::string_view source);

struct OverridePin {
  CellAddress address;
  double value = 0.0;
  std::string source;
};

// Pins a value that recalculation will not overwrite. A pin on an
// input-eligible cell is stored as plain data. Takes effect without a recalc;
// dependants update on the next one.
void override_cell(Cube& cube, const RuleSet& rules, const OverridePin& pin);

// Releases a pin so the next recalc recomputes the cell. Returns false (and
// changes nothing) when the cell was not pinned.
bool clear_override(Cube& cube, const CellAddress& address);

// A structure, its rules and the materialized cube.
struct Model {
  std::shared_ptr<const ModelStructure> structure;
  RuleSet rules;
  Cube cube;

  Model(ModelStructure s, RuleSet r);
  Model(std::shared_ptr<const ModelStructure> s, RuleSet r);
};

}  // namespace pivotmodel
