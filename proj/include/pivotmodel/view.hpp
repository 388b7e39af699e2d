#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pivotmodel/cube.hpp"
#include "pivotmodel/rule_set.hpp"

namespace pivotmodel {

// Pivot layout. Every dimension is placed exactly once: on a page (fixed to
// one member), on rows or on columns. For a placed dimension the displayed
// members are, in order of preference: the explicit member_selection; the
// hierarchy roots plus children of members listed in `expand`; or, when the
// dimension has neither, every member in dimension order.
struct ViewSpec {
  std::vector<std::pair<std::string, std::string>> pages;
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::map<std::string, std::vector<std::string>> expand;
  std::map<std::string, std::vector<std::string>> member_selection;
};

enum class CellFlag : std::uint8_t { input, rule, override_pin, error };

std::string_view to_string(CellFlag flag) noexcept;

struct ViewGrid {
  std::vector<std::string> row_dimensions;
  std::vector<std::string> col_dimensions;
  std::vector<std::vector<std::string>> row_headers;  // one member-name tuple per row
  std::vector<std::vector<std::string>> col_headers;
  std::vector<CellValue> values;  // row-major, rows x cols
  std::vector<CellFlag> flags;
  std::uint64_t model_version = 0;

  std::size_t row_count() const noexcept { return row_headers.size(); }
  std::size_t col_count() const noexcept { return col_headers.size(); }
  CellValue at(std::size_t r, std::size_t c) const { return values.at(r * col_count() + c); }
  CellFlag flag(std::size_t r, std::size_t c) const { return flags.at(r * col_count() + c); }
};

// Visible members of one dimension under the spec; throws Error(validation)
// for an expanded member that has no children or is hidden by a collapsed
// ancestor.
std::vector<std::size_t> visible_members(const ModelStructure& structure, std::size_t dim, const ViewSpec& spec);

// Cost is proportional to the grid size, not the cube size.
ViewGrid materialize_view(const Cube& cube, const RuleSet& rules, const ViewSpec& spec,
                          std::uint64_t model_version = 0);

// Row header columns then one column per column tuple (tuple members joined by " / ").
std::string view_to_csv(const ViewGrid& grid);

}  // namespace pivotmodel
