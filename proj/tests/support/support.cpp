#include "support.hpp"

#include <map>
#include <random>

#include "pivotmodel/csv.hpp"
#include "pivotmodel/rule_set.hpp"

#ifndef PIVOTMODEL_SOURCE_DIR
#error "PIVOTMODEL_SOURCE_DIR must point at the repository root"
#endif

namespace pmtest {

std::string repo_path(std::string_view relative) {
  return std::string(PIVOTMODEL_SOURCE_DIR) + "/" + std::string(relative);
}

pm::ModelDocument read_document(std::string_view relative) {
  return pm::parse_model_document(pm::read_text_file(repo_path(relative)));
}

pm::Model load_repo_model(std::string_view relative) { return pm::load_model(repo_path(relative)); }

pm::ModelDocument lighting_document() { return read_document("models/lighting.json"); }

pm::Model lighting_model() { return pm::build_model(lighting_document()); }

pm::ModelDocument lighting_document_asia_first() {
  auto doc = lighting_document();
  for (auto& r : doc.rules) {
    if (r.name == "ORG - International") r.formula = "=({Asia Pacific})+({Europe})";
  }
  return doc;
}

std::vector<std::string> lighting_order_year_last() {
  std::vector<std::string> order;
  for (const auto& r : lighting_document().rules) {
    if (r.name != "TIME - Year") order.push_back(r.name);
  }
  order.push_back("TIME - Year");
  return order;
}

namespace {

// Per-cell magnitude ranges for the Lighting accounts.
const std::map<std::string, std::pair<double, double>>& account_ranges() {
  static const std::map<std::string, std::pair<double, double>> ranges = {
      {"Total sales", {9000.0, 10500.0}},
      {"Discounts and allowances", {3.0, 4.0}},
      {"Standard cost of sales", {6500.0, 7200.0}},
      {"Manufacturing Variances", {85.0, 100.0}},
      {"Other Adjustments", {42.0, 48.0}},
      {"Engineering", {400.0, 500.0}},
      {"Research & development", {120.0, 170.0}},
      {"General & administrative", {500.0, 600.0}},
      {"Sales & marketing", {480.0, 550.0}},
  };
  return ranges;
}

}  // namespace

std::size_t fill_synthetic(pm::Model& model, std::uint64_t seed) {
  const auto& s = *model.structure;
  auto leaves = model.rules.leaf_mask(s);
  auto accts = s.find_dimension("ACCTS");
  std::vector<std::pair<double, double>> ranges;
  if (accts) {
    for (const auto& m : s.dimension(*accts).members()) {
      auto it = account_ranges().find(m.name);
      ranges.push_back(it == account_ranges().end() ? std::pair{50.0, 500.0} : it->second);
    }
  }
  std::mt19937_64 rng(seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  auto source = model.cube.intern_source("synthetic");
  std::size_t written = 0;
  for (std::size_t i = 0; i < model.cube.size(); ++i) {
    if (!pm::is_input_eligible(leaves, s, i)) continue;
    auto [lo, hi] = accts ? ranges[s.coordinate(i, *accts)] : std::pair{50.0, 500.0};
    double v = lo + (hi - lo) * unit();
    model.cube.store(i, pm::CellValue::number(v), {pm::ProvenanceKind::data, source});
    ++written;
  }
  return written;
}

pm::ModelDocument large_document() {
  pm::ModelDocument doc;
  doc.structure.name = "Synthetic 10^6";
  auto rule = [&](std::string dim, std::string target, std::string formula) {
    pm::RuleSpec r;
    r.name = dim + " - " + target;
    r.dimension = std::move(dim);
    r.target = std::move(target);
    r.formula = std::move(formula);
    r.folder = {"Generated"};
    doc.rules.push_back(std::move(r));
  };
  auto sum_of = [](const std::vector<std::string>& names) {
    std::string f = "=SUM(";
    for (std::size_t i = 0; i < names.size(); ++i) f += (i ? ",{" : "{") + names[i] + "}";
    return f + ")";
  };
  auto named = [](const char* prefix, int i) {
    return std::string(prefix) + (i < 10 ? "0" : "") + std::to_string(i);
  };

  // ENTITY: 20 entities in 4 regions, one total.
  pm::DimensionSpec entity{"ENTITY", {}};
  for (int i = 1; i <= 20; ++i) entity.members.push_back({named("E", i), {}, "R" + std::to_string((i - 1) / 5 + 1), {}});
  for (int r = 1; r <= 4; ++r) entity.members.push_back({"R" + std::to_string(r), {}, "Total", {}});
  entity.members.push_back({"Total", {}, {}, {}});
  for (int r = 1; r <= 4; ++r) {
    std::vector<std::string> kids;
    for (int i = (r - 1) * 5 + 1; i <= r * 5; ++i) kids.push_back(named("E", i));
    rule("ENTITY", "R" + std::to_string(r), sum_of(kids));
  }
  rule("ENTITY", "Total", sum_of({"R1", "R2", "R3", "R4"}));

  // PRODUCT: 8 products in 2 groups.
  pm::DimensionSpec product{"PRODUCT", {}};
  for (int i = 1; i <= 8; ++i) product.members.push_back({"Prod" + std::to_string(i), {}, i <= 4 ? "Group A" : "Group B", {}});
  product.members.push_back({"Group A", {}, {}, {}});
  product.members.push_back({"Group B", {}, {}, {}});
  rule("PRODUCT", "Group A", sum_of({"Prod1", "Prod2", "Prod3", "Prod4"}));
  rule("PRODUCT", "Group B", sum_of({"Prod5", "Prod6", "Prod7", "Prod8"}));

  // TIME: 16 periods in 4 quarters.
  pm::DimensionSpec time{"TIME", {}};
  for (int i = 1; i <= 16; ++i) time.members.push_back({named("P", i), {}, "Q" + std::to_string((i - 1) / 4 + 1), {}});
  for (int q = 1; q <= 4; ++q) {
    time.members.push_back({"Q" + std::to_string(q), {}, {}, {}});
    std::vector<std::string> kids;
    for (int i = (q - 1) * 4 + 1; i <= q * 4; ++i) kids.push_back(named("P", i));
    rule("TIME", "Q" + std::to_string(q), sum_of(kids));
  }

  // ACCT: 35 lines in 7 subtotals, two group totals, a net line, 5 ratios.
  pm::DimensionSpec acct{"ACCT", {}};
  for (int i = 0; i < 35; ++i) acct.members.push_back({named("A", i), {}, "S" + std::to_string(i / 5), {}});
  for (int k = 0; k < 7; ++k) {
    acct.members.push_back({"S" + std::to_string(k), {}, k < 3 ? "S7" : "S8", {}});
    std::vector<std::string> kids;
    for (int i = k * 5; i < k * 5 + 5; ++i) kids.push_back(named("A", i));
    rule("ACCT", "S" + std::to_string(k), sum_of(kids));
  }
  acct.members.push_back({"S7", {}, "S9", {}});
  acct.members.push_back({"S8", {}, "S9", {}});
  acct.members.push_back({"S9", {}, {}, {}});
  rule("ACCT", "S7", "={S0}+{S1}+{S2}");
  rule("ACCT", "S8", "={S3}+{S4}+{S5}+{S6}");
  rule("ACCT", "S9", "={S7}-{S8}");
  for (int k = 0; k < 5; ++k) {
    acct.members.push_back({"Ratio" + std::to_string(k), {}, {}, "percent"});
    rule("ACCT", "Ratio" + std::to_string(k), "=IFERROR({S" + std::to_string(k) + "}/{S7},0)");
  }

  pm::DimensionSpec scen{"SCEN", {{"Actual", {}, {}, {}}, {"Budget", {}, {}, {}}, {"Var", {}, {}, {}}, {"VarPct", {}, {}, {}}}};
  rule("SCEN", "Var", "=IFERROR({Actual}-{Budget},0)");
  rule("SCEN", "VarPct", "=IFERROR({Var}/{Actual},0)");

  doc.structure.dimensions = {acct, time, entity, product, scen};
  return doc;
}

pm::CellAddress address(const pm::Model& model, std::string_view named) {
  return model.structure->resolve(pm::parse_named_address(named));
}

pm::CellValue value_at(const pm::Model& model, std::string_view named) {
  return model.cube.value(address(model, named));
}

}  // namespace pmtest
