#pragma once

// Random small models for property tests: up to 4 dimensions of up to 6
// members, up to 8 rules that never read their own scope, random data and a
// few pinned cells.

#include <cstdint>
#include <map>
#include <random>

#include "oracle.hpp"
#include "pivotmodel/model_file.hpp"

namespace pmtest {

struct RandomCase {
  pm::ModelDocument doc;
  std::map<Coords, double> data;  // input-eligible cells only
  std::map<Coords, double> pins;  // rule-covered cells only
};

struct RandomCaseOptions {
  std::size_t max_dimensions = 4;
  std::size_t max_members = 6;
  std::size_t max_rules = 8;
  double filter_probability = 0.25;
  double override_probability = 0.2;
  std::size_t max_pins = 3;
};

// Operands in the anchor dimension are chosen among members no later rule
// targets, which keeps plain rule sets well ordered; filters, overrides and
// cross-dimension interplay can still break that, so callers check
// RecursiveOracle::well_ordered() and draw again.
RandomCase random_case(std::mt19937_64& rng, const RandomCaseOptions& options = {});

// Random formula over the given member names, as an unbound tree.
pm::Expression random_expression(std::mt19937_64& rng, const std::vector<std::string>& members, int depth);

}  // namespace pmtest
