#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pivotmodel/cube.hpp"
#include "pivotmodel/rule_set.hpp"

namespace pivotmodel {

struct RowIssue {
  std::size_t line = 0;
  std::string reason;
};

// rows_loaded + rejected.size() == rows_total.
struct LoadReport {
  std::size_t rows_total = 0;
  std::size_t rows_loaded = 0;
  std::size_t cells_written = 0;  // distinct addresses
  std::vector<RowIssue> rejected;
  std::vector<RowIssue> warnings;  // e.g. an address written twice (last row wins)
};

// How loaded values are stored. `pins` writes OVERRIDE cells and accepts any
// address; it is how persisted overrides are restored.
enum class LoadTarget { data, pins };

// Long format: one column per dimension (by name, any order) plus "Value".
// Header problems throw before the cube is touched; bad rows are rejected and
// reported while the rest of the file loads. Does not recalculate.
LoadReport load_long_csv(Cube& cube, const RuleSet& rules, std::string_view csv_text, std::string_view source,
                         LoadTarget target = LoadTarget::data);

// Wide format: some dimension columns plus member columns of one spread
// dimension (named, or inferred from the headers). Every dimension other than
// the spread one needs a column. Empty value cells are skipped.
LoadReport load_wide_csv(Cube& cube, const RuleSet& rules, std::string_view csv_text, std::string_view source,
                         std::optional<std::string> spread_dimension = std::nullopt);

enum class DataFormat { long_format, wide_format };

// Long when the header carries a "Value" column.
DataFormat detect_format(std::string_view csv_text);

LoadReport load_csv_file(Cube& cube, const RuleSet& rules, const std::string& path, std::string_view source);

enum class ExportLayer { data, calculated, overrides, all };

// Dimension name -> members to keep; absent dimensions are unrestricted.
using MemberFilter = std::map<std::string, std::vector<std::string>>;

// Long-format export in cube order. `data` is DATA cells, `calculated` is
// RULE and OVERRIDE cells, `overrides` is OVERRIDE cells only, `all` is
// every non-empty cell.
std::string export_long_csv(const Cube& cube, const MemberFilter& filter, ExportLayer layer);

// One row per non-empty cell: members, value, provenance, source, and for rule
// cells the rule name and its formula in business terms.
std::string export_cell_ledger(const Cube& cube, const RuleSet& rules);

}  // namespace pivotmodel
