#pragma once

// Fixtures shared by the unit and acceptance tests.

#include <cstdint>
#include <string>
#include <string_view>

#include "pivotmodel/engine.hpp"
#include "pivotmodel/model_file.hpp"

namespace pmtest {

namespace pm = pivotmodel;

// Absolute path of a file shipped with the repository (models/, data/).
std::string repo_path(std::string_view relative);

pm::ModelDocument read_document(std::string_view relative);
pm::Model load_repo_model(std::string_view relative);

// The Lighting company model: 14 accounts x 5 periods x 5 products x 9
// organizations x 4 scenarios, 12 rules.
pm::ModelDocument lighting_document();
pm::Model lighting_model();

// Lighting with the International rule written with Asia Pacific first, the
// operand order the drill-down sheet shows.
pm::ModelDocument lighting_document_asia_first();

// Lighting with the Year rule moved after the scenario rules, so the period
// total of %Var becomes the sum of the quarterly ratios.
std::vector<std::string> lighting_order_year_last();

// Stores a deterministic pseudo-random value in every input-eligible cell.
// Lighting accounts get magnitudes resembling the sample statement; other
// members get values in [50, 500). Every cell is drawn independently.
// Returns the number of cells written.
std::size_t fill_synthetic(pm::Model& model, std::uint64_t seed);

// A synthetic 50 x 20 x 25 x 10 x 4 = 10^6 cell model with 28 rollup and
// ratio rules.
pm::ModelDocument large_document();

pm::CellAddress address(const pm::Model& model, std::string_view named);
pm::CellValue value_at(const pm::Model& model, std::string_view named);

}  // namespace pmtest
