#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "pivotmodel/csv.hpp"
#include "pivotmodel/data_io.hpp"
#include "pivotmodel/engine.hpp"
#include "pivotmodel/error.hpp"
#include "pivotmodel/lint.hpp"
#include "random_model.hpp"
#include "support.hpp"

namespace pm = pivotmodel;

namespace {

constexpr const char* kEuropeOutdoor = "TIME=Qtr1,PRODUCT=Outdoor,ORG=Europe,SCENARIO=Budget";

std::string at(const char* account, const char* rest) { return std::string("ACCTS=") + account + "," + rest; }

// Oracle over the model's current DATA and OVERRIDE cells.
pmtest::RecursiveOracle oracle_for(const pm::Model& model) {
  std::map<pmtest::Coords, double> data, pins;
  for (std::size_t i = 0; i < model.cube.size(); ++i) {
    auto kind = model.cube.provenance(i).kind;
    if (kind == pm::ProvenanceKind::data) data[model.structure->address_of(i).ordinals] = model.cube.value(i).number();
    if (kind == pm::ProvenanceKind::override_pin) pins[model.structure->address_of(i).ordinals] = model.cube.value(i).number();
  }
  return pmtest::RecursiveOracle(*model.structure, model.rules.specs(), data, pins);
}

// Cells whose value or provenance differs from the oracle.
std::size_t oracle_mismatches(const pm::Model& model) {
  auto oracle = oracle_for(model);
  REQUIRE(oracle.well_ordered());
  std::size_t bad = 0;
  for (std::size_t i = 0; i < model.cube.size(); ++i) {
    auto expected = oracle.cell(model.structure->address_of(i).ordinals);
    auto p = model.cube.provenance(i);
    bool same = model.cube.value(i).bits() == expected.value.bits() && p.kind == expected.kind &&
                (p.kind != pm::ProvenanceKind::rule || p.ref == expected.rule_sequence);
    if (!same) ++bad;
  }
  return bad;
}

std::size_t count_kind(const pm::Cube& cube, pm::ProvenanceKind kind) {
  std::size_t n = 0;
  for (auto p : cube.provenance()) n += p.kind == kind;
  return n;
}

pm::Model small_model(const std::vector<pm::RuleSpec>& rules) {
  pm::ModelDocument doc;
  doc.structure.name = "small";
  doc.structure.dimensions = {
      {"ACCTS", {{"Sales", {}, {}, {}}, {"Cost", {}, {}, {}}, {"Margin", {}, {}, {}}}},
      {"TIME", {{"Q1", {}, "Year", {}}, {"Q2", {}, "Year", {}}, {"Year", {}, {}, {}}}},
  };
  doc.rules = rules;
  return pm::build_model(doc);
}

pm::RuleSpec rule(std::string dim, std::string target, std::string formula) {
  pm::RuleSpec r;
  r.name = dim + " - " + target;
  r.dimension = std::move(dim);
  r.target = std::move(target);
  r.formula = std::move(formula);
  return r;
}

}  // namespace

TEST_CASE("rule scope is the anchor member across every other dimension") {
  auto model = pmtest::lighting_model();
  const auto& s = *model.structure;
  const auto& net_sales = model.rules[model.rules.index_of("ACCTS - Net sales")];
  CHECK(pm::scope_size(net_sales, s) == 900);
  auto scope = pm::scope_indices(net_sales, s);
  CHECK(scope.size() == 900);
  CHECK(std::is_sorted(scope.begin(), scope.end()));
  for (auto i : scope) CHECK(s.coordinate(i, 0) == 2);
  CHECK(pm::rule_scope(net_sales, s).front() == s.address_of(scope.front()));

  auto spec = net_sales.spec;
  spec.filters = {{"ORG", {"Europe", "Asia Pacific"}}, {"SCENARIO", {"Budget"}}};
  auto filtered = pm::bind_rule(spec, s);
  CHECK(pm::scope_size(filtered, s) == 5 * 5 * 2 * 1);
  CHECK(pm::scope_indices(filtered, s).size() == 50);
}

TEST_CASE("the Europe budget chain computes net sales from the wide load") {
  auto model = pmtest::lighting_model();
  auto report = pm::load_wide_csv(model.cube, model.rules,
                                  pm::read_text_file(pmtest::repo_path("data/europe_budget.csv")), "europe-budget");
  CHECK(report.rows_loaded == 16);
  CHECK(report.cells_written == 80);
  pm::apply_rules(model.cube, model.rules);

  auto ns = pmtest::value_at(model, at("Net sales", kEuropeOutdoor));
  CHECK(std::abs(ns.number() - 9863.25760) <= 5e-5);
  CHECK(pmtest::value_at(model, at("Total sales", kEuropeOutdoor)).number() == 9866.786353);

  // Product total: the four Qtr1 rows summed left to right.
  double expected = (9108.738986 - 3.449074244) + (9411.467163 - 3.758920712) + (9635.398421 - 3.692983947) +
                    (9866.786353 - 3.528756623);
  auto total = pmtest::value_at(model, "ACCTS=Net sales,TIME=Qtr1,PRODUCT=Total Products,ORG=Europe,SCENARIO=Budget");
  CHECK(std::abs(total.number() - expected) <= 1e-9 * std::abs(expected));
  CHECK(oracle_mismatches(model) == 0);
}

TEST_CASE("recalculation on synthetic data matches the recursive oracle bit for bit") {
  auto model = pmtest::lighting_model();
  CHECK(pmtest::fill_synthetic(model, 11) == 1728);
  auto report = pm::apply_rules(model.cube, model.rules);
  CHECK(count_kind(model.cube, pm::ProvenanceKind::rule) == 10872);
  CHECK(count_kind(model.cube, pm::ProvenanceKind::data) == 1728);
  CHECK(report.cells_written - report.overwrites == 10872);
  CHECK(report.rules.size() == 12);
  CHECK(report.skipped_pinned == 0);
  CHECK(report.contested_cells > 0);
  CHECK(report.contested_cells <= report.overwrites);
  CHECK(oracle_mismatches(model) == 0);
}

TEST_CASE("recalculation is idempotent and deterministic") {
  auto a = pmtest::lighting_model();
  auto b = pmtest::lighting_model();
  pmtest::fill_synthetic(a, 5);
  pmtest::fill_synthetic(b, 5);
  pm::apply_rules(a.cube, a.rules);
  pm::apply_rules(b.cube, b.rules);
  pm::apply_rules(b.cube, b.rules);
  for (std::size_t i = 0; i < a.cube.size(); ++i) {
    REQUIRE(a.cube.value(i) == b.cube.value(i));
    REQUIRE(a.cube.provenance(i).kind == b.cube.provenance(i).kind);
  }
}

TEST_CASE("disabling a rule resets the cells it computed") {
  auto model = pmtest::lighting_model();
  pm::apply_rules(model.cube, model.rules);
  CHECK(count_kind(model.cube, pm::ProvenanceKind::empty) == 1728);
  model.rules = model.rules.with_enabled(model.rules.index_of("TIME - Year"), false);
  pm::apply_rules(model.cube, model.rules);
  // Year cells of leaf accounts, products, organizations and scenarios.
  CHECK(count_kind(model.cube, pm::ProvenanceKind::empty) == 1728 + 432);

  // With no rules at all, only data is left.
  auto bare = pmtest::lighting_model();
  pmtest::fill_synthetic(bare, 3);
  for (std::size_t i = 0; i < bare.rules.size(); ++i) bare.rules = bare.rules.with_enabled(i, false);
  auto report = pm::apply_rules(bare.cube, bare.rules);
  CHECK(report.cells_written == 0);
  CHECK(count_kind(bare.cube, pm::ProvenanceKind::rule) == 0);
}

TEST_CASE("a rule reads the cube as it stood when the rule started") {
  // The rule reads (Sales, Q1), a cell inside its own scope.
  auto model = small_model({rule("TIME", "Q2", "={Q1}+1"), rule("ACCTS", "Sales", "={Sales | TIME=Q1}+1")});
  CHECK(pm::is_self_referential(model.rules[1]));
  pm::apply_rules(model.cube, model.rules);
  // Rule 2 evaluates every cell against the state after rule 1: (Sales, Q1) is empty then.
  CHECK(pmtest::value_at(model, "ACCTS=Sales,TIME=Q1").number() == 1);
  CHECK(pmtest::value_at(model, "ACCTS=Sales,TIME=Q2").number() == 1);
  CHECK(pmtest::value_at(model, "ACCTS=Sales,TIME=Year").number() == 1);
}

TEST_CASE("later rules win on shared cells") {
  auto model = small_model({rule("TIME", "Year", "={Q1}+{Q2}"), rule("ACCTS", "Margin", "={Sales}-{Cost}"),
                            rule("ACCTS", "Margin", "=IFERROR({Cost}/{Sales},0)")});
  auto s = model.structure;
  std::vector<pm::CellWrite> writes = {{pmtest::address(model, "ACCTS=Sales,TIME=Q1"), 10},
                                       {pmtest::address(model, "ACCTS=Cost,TIME=Q1"), 4},
                                       {pmtest::address(model, "ACCTS=Sales,TIME=Q2"), 20},
                                       {pmtest::address(model, "ACCTS=Cost,TIME=Q2"), 4}};
  auto report = pm::write_back(model.cube, model.rules, writes, "test");
  CHECK(pmtest::value_at(model, "ACCTS=Margin,TIME=Q1").number() == 0.4);
  CHECK(pmtest::value_at(model, "ACCTS=Margin,TIME=Year").number() == 8.0 / 30.0);
  CHECK(model.cube.provenance(s->linear_index(pmtest::address(model, "ACCTS=Margin,TIME=Year"))).ref == 3);
  // Rules 2 and 3 both write all three Margin cells; rule 1 writes (Margin, Year) first.
  CHECK(report.cells_written == 3 + 3 + 3);
  CHECK(report.overwrites == 4);
  CHECK(report.contested_cells == 3);
}

TEST_CASE("write-back validates every cell before storing any") {
  auto model = pmtest::lighting_model();
  pmtest::fill_synthetic(model, 9);
  pm::apply_rules(model.cube, model.rules);
  auto leaf = pmtest::address(model, at("Total sales", kEuropeOutdoor));
  auto before = model.cube.value(leaf);
  std::vector<pm::CellWrite> writes = {{leaf, 1.0}, {pmtest::address(model, at("Net sales", kEuropeOutdoor)), 2.0}};
  try {
    pm::write_back(model.cube, model.rules, writes, "user");
    FAIL("rule-covered cell accepted");
  } catch (const pm::Error& e) {
    CHECK(e.code() == pm::ErrorCode::validation);
  }
  CHECK(model.cube.value(leaf) == before);

  std::vector<pm::CellWrite> nan_write = {{leaf, std::nan("")}};
  CHECK_THROWS_AS(pm::write_back(model.cube, model.rules, nan_write, "user"), pm::Error);

  std::vector<pm::CellWrite> ok = {{leaf, 10000.0}};
  pm::write_back(model.cube, model.rules, ok, "user:alice");
  auto linear = model.structure->linear_index(leaf);
  CHECK(model.cube.value(linear).number() == 10000.0);
  CHECK(model.cube.provenance(linear).kind == pm::ProvenanceKind::data);
  CHECK(model.cube.source_name(model.cube.provenance(linear).ref) == "user:alice");
  auto var = pmtest::value_at(model, "ACCTS=Total sales,TIME=Qtr1,PRODUCT=Outdoor,ORG=Europe,SCENARIO=$Var");
  auto act = pmtest::value_at(model, "ACCTS=Total sales,TIME=Qtr1,PRODUCT=Outdoor,ORG=Europe,SCENARIO=Actuals");
  CHECK(var.number() == act.number() - 10000.0);
  CHECK(oracle_mismatches(model) == 0);
}

TEST_CASE("overrides pin computed cells until released") {
  auto model = pmtest::lighting_model();
  pmtest::fill_synthetic(model, 21);
  pm::apply_rules(model.cube, model.rules);
  auto cell = pmtest::address(model, "ACCTS=Total sales,TIME=Qtr1,PRODUCT=Outdoor,ORG=International,SCENARIO=Budget");
  auto linear = model.structure->linear_index(cell);
  auto computed = model.cube.value(linear);

  pm::override_cell(model.cube, model.rules, {cell, 5000.0, "what-if"});
  CHECK(model.cube.provenance(linear).kind == pm::ProvenanceKind::override_pin);
  auto report = pm::apply_rules(model.cube, model.rules);
  CHECK(report.skipped_pinned >= 1);
  CHECK(model.cube.value(linear).number() == 5000.0);
  // Rules that run after the pinned cell's own rule read the pin.
  auto company = pmtest::value_at(model, "ACCTS=Total sales,TIME=Qtr1,PRODUCT=Outdoor,ORG=Total Company,SCENARIO=Budget");
  auto domestic = pmtest::value_at(model, "ACCTS=Total sales,TIME=Qtr1,PRODUCT=Outdoor,ORG=Domestic,SCENARIO=Budget");
  CHECK(company.number() == domestic.number() + 5000.0);
  CHECK(oracle_mismatches(model) == 0);

  CHECK(pm::clear_override(model.cube, cell));
  CHECK_FALSE(pm::clear_override(model.cube, cell));
  CHECK_FALSE(pm::clear_override(model.cube, pmtest::address(model, at("Total sales", kEuropeOutdoor))));
  pm::apply_rules(model.cube, model.rules);
  CHECK(model.cube.value(linear) == computed);
  CHECK(model.cube.provenance(linear).kind == pm::ProvenanceKind::rule);

  // A pin on an input cell is ordinary data.
  auto leaf = pmtest::address(model, at("Total sales", kEuropeOutdoor));
  pm::override_cell(model.cube, model.rules, {leaf, 1.5, "what-if"});
  CHECK(model.cube.provenance(model.structure->linear_index(leaf)).kind == pm::ProvenanceKind::data);
}

TEST_CASE("random well-ordered models agree with the oracle") {
  std::mt19937_64 rng(99);
  int accepted = 0, drawn = 0;
  while (accepted < 60 && drawn < 2000) {
    ++drawn;
    auto c = pmtest::random_case(rng);
    auto model = pm::build_model(c.doc);
    pmtest::RecursiveOracle oracle(*model.structure, c.doc.rules, c.data, c.pins);
    if (!oracle.well_ordered()) continue;
    ++accepted;
    for (const auto& r : model.rules.rules()) REQUIRE_FALSE(pm::is_self_referential(r));

    std::vector<pm::CellWrite> writes;
    for (const auto& [coords, v] : c.data) writes.push_back({{coords}, v});
    pm::write_back(model.cube, model.rules, writes, "random");
    for (const auto& [coords, v] : c.pins) pm::override_cell(model.cube, model.rules, {{coords}, v, "pin"});
    pm::apply_rules(model.cube, model.rules);

    for (const auto& coords : oracle.all_cells()) {
      auto expected = oracle.cell(coords);
      auto linear = model.structure->linear_index({coords});
      INFO(model.structure->describe({coords}));
      REQUIRE(model.cube.value(linear).bits() == expected.value.bits());
      REQUIRE(model.cube.provenance(linear).kind == expected.kind);
    }
  }
  CHECK(accepted == 60);
}
