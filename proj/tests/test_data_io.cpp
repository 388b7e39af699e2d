#include <filesystem>

#include "doctest.h"
#include "pivotmodel/csv.hpp"
#include "pivotmodel/data_io.hpp"
#include "pivotmodel/error.hpp"
#include "pivotmodel/model_file.hpp"
#include "support.hpp"

namespace pm = pivotmodel;

namespace {

const std::string kHeader = "ACCTS,SCENARIO,TIME,ORG,PRODUCT,Value\n";

pm::ErrorCode load_error(pm::Model& model, const std::string& text, bool wide = false) {
  try {
    if (wide) {
      pm::load_wide_csv(model.cube, model.rules, text, "t");
    } else {
      pm::load_long_csv(model.cube, model.rules, text, "t");
    }
  } catch (const pm::Error& e) {
    return e.code();
  }
  FAIL("file accepted");
  return pm::ErrorCode::io;
}

std::size_t non_empty(const pm::Cube& cube) {
  std::size_t n = 0;
  for (auto p : cube.provenance()) n += p.kind != pm::ProvenanceKind::empty;
  return n;
}

}  // namespace

TEST_CASE("csv parsing follows RFC 4180") {
  auto records = pm::parse_csv("\xEF\xBB\xBF" "a,\"b, c\",\"say \"\"hi\"\"\"\r\n\r\n1,\"two\nlines\",3\n");
  REQUIRE(records.size() == 2);
  CHECK(records[0].fields == std::vector<std::string>{"a", "b, c", "say \"hi\""});
  CHECK(records[0].line == 1);
  CHECK(records[1].fields == std::vector<std::string>{"1", "two\nlines", "3"});
  CHECK(records[1].line == 3);
  CHECK_THROWS_AS(pm::parse_csv("a,\"b\n"), pm::Error);

  pm::CsvWriter w;
  w.field("plain").field("with, comma").field("quote\"d").end_row().blank_row().field("x").end_row();
  CHECK(w.str() == "plain,\"with, comma\",\"quote\"\"d\"\n\nx\n");
}

TEST_CASE("the ERP sample loads through aliases and grouped numbers") {
  auto model = pmtest::lighting_model();
  auto report = pm::load_csv_file(model.cube, model.rules, pmtest::repo_path("data/erp_actuals.csv"), "erp");
  CHECK(report.rows_total == 19);
  CHECK(report.rows_loaded == 19);
  CHECK(report.rejected.empty());
  CHECK(report.cells_written == 19);
  auto cell = pmtest::address(model, "ACCTS=Standard cost of sales,SCENARIO=Actuals,TIME=Qtr1,ORG=Asia Pacific,PRODUCT=Outdoor");
  auto linear = model.structure->linear_index(cell);
  CHECK(model.cube.value(linear).number() == 6602.56);
  CHECK(model.cube.provenance(linear).kind == pm::ProvenanceKind::data);
  CHECK(model.cube.source_name(model.cube.provenance(linear).ref) == "erp");
}

TEST_CASE("the wide budget file spreads accounts across columns") {
  auto model = pmtest::lighting_model();
  auto text = pm::read_text_file(pmtest::repo_path("data/europe_budget.csv"));
  CHECK(pm::detect_format(text) == pm::DataFormat::wide_format);
  auto report = pm::load_wide_csv(model.cube, model.rules, text, "budget");
  CHECK(report.rows_total == 16);
  CHECK(report.rows_loaded == 16);
  CHECK(report.cells_written == 80);
  CHECK(pmtest::value_at(model, "ACCTS=Manufacturing Variances,SCENARIO=Budget,TIME=Qtr4,ORG=Europe,PRODUCT=Outdoor").number() ==
        89.31782528);

  // Naming the spread dimension gives the same result.
  auto named = pmtest::lighting_model();
  pm::load_wide_csv(named.cube, named.rules, text, "budget", "ACCTS");
  for (std::size_t i = 0; i < model.cube.size(); ++i) REQUIRE(named.cube.value(i) == model.cube.value(i));
}

TEST_CASE("header problems reject the whole file before anything is stored") {
  auto model = pmtest::lighting_model();
  CHECK(load_error(model, "") == pm::ErrorCode::data);
  CHECK(load_error(model, "ACCTS,SCENARIO,TIME,ORG,Value\nTotal sales,Budget,Qtr1,Europe,1\n") == pm::ErrorCode::data);
  CHECK(load_error(model, "ACCTS,SCENARIO,TIME,ORG,PRODUCT,Amount\n") == pm::ErrorCode::data);
  CHECK(load_error(model, "ACCTS,SCENARIO,TIME,ORG,PRODUCT,REGION,Value\n") == pm::ErrorCode::data);
  CHECK(load_error(model, "ACCTS,ACCTS,SCENARIO,TIME,ORG,PRODUCT,Value\n") == pm::ErrorCode::data);
  // Wide: member columns from two dimensions, a missing dimension column, an unknown column.
  CHECK(load_error(model, "SCENARIO,TIME,ORG,Sales,Outdoor\n", true) == pm::ErrorCode::data);
  CHECK(load_error(model, "SCENARIO,TIME,Sales\n", true) == pm::ErrorCode::data);
  CHECK(load_error(model, "SCENARIO,TIME,ORG,PRODUCT,Sales,Bonus\n", true) == pm::ErrorCode::data);
  CHECK(non_empty(model.cube) == 0);
}

TEST_CASE("bad rows are rejected with their line while the rest loads") {
  auto model = pmtest::lighting_model();
  std::string text = kHeader +
                     "Total sales,Budget,Qtr1,Europe,Outdoor,100\n"
                     "Total sales,Budget,Qtr1,Mars,Outdoor,100\n"
                     "Net sales,Budget,Qtr1,Europe,Outdoor,100\n"
                     "Total sales,Budget,Qtr2,Europe,Outdoor,n/a\n"
                     "Total sales,Budget,Qtr3,Europe\n"
                     "Total sales,Budget,Qtr1,Europe,Outdoor,\"1,250.5\"\n";
  auto report = pm::load_long_csv(model.cube, model.rules, text, "t");
  CHECK(report.rows_total == 6);
  CHECK(report.rows_loaded == 2);
  REQUIRE(report.rejected.size() == 4);
  CHECK(report.rows_loaded + report.rejected.size() == report.rows_total);
  CHECK(report.rejected[0].line == 3);
  CHECK(report.rejected[0].reason.find("Mars") != std::string::npos);
  CHECK(report.rejected[1].line == 4);
  CHECK(report.rejected[1].reason.find("aggregate member not loadable") != std::string::npos);
  CHECK(report.rejected[2].line == 5);
  CHECK(report.rejected[3].line == 6);
  // The address appears twice: a warning, and the last row wins.
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].line == 7);
  CHECK(report.cells_written == 1);
  CHECK(pmtest::value_at(model, "ACCTS=Total sales,SCENARIO=Budget,TIME=Qtr1,ORG=Europe,PRODUCT=Outdoor").number() == 1250.5);
}

TEST_CASE("wide rows skip empty cells and reject the row on a bad cell") {
  auto model = pmtest::lighting_model();
  std::string text =
      "SCENARIO,TIME,ORG,PRODUCT,Sales,Discounts and allowances\n"
      "Budget,Qtr1,Europe,Outdoor,100,\n"
      "Budget,Qtr2,Europe,Outdoor,200,oops\n"
      "Budget,Qtr3,Europe,Total Products,300,1\n";
  auto report = pm::load_wide_csv(model.cube, model.rules, text, "t");
  CHECK(report.rows_total == 3);
  CHECK(report.rows_loaded == 1);
  CHECK(report.rejected.size() == 2);
  CHECK(report.cells_written == 1);
  CHECK(non_empty(model.cube) == 1);
}

TEST_CASE("pins load on any cell as overrides") {
  auto model = pmtest::lighting_model();
  auto report = pm::load_long_csv(model.cube, model.rules, kHeader + "Net sales,Budget,Year,Europe,Outdoor,5\n", "t",
                                  pm::LoadTarget::pins);
  CHECK(report.rows_loaded == 1);
  auto linear = model.structure->linear_index(
      pmtest::address(model, "ACCTS=Net sales,SCENARIO=Budget,TIME=Year,ORG=Europe,PRODUCT=Outdoor"));
  CHECK(model.cube.provenance(linear).kind == pm::ProvenanceKind::override_pin);
}

TEST_CASE("data export and re-import is a fixpoint") {
  auto model = pmtest::lighting_model();
  pmtest::fill_synthetic(model, 17);
  pm::apply_rules(model.cube, model.rules);
  auto exported = pm::export_long_csv(model.cube, {}, pm::ExportLayer::data);
  CHECK(pm::detect_format(exported) == pm::DataFormat::long_format);

  auto fresh = pmtest::lighting_model();
  auto report = pm::load_long_csv(fresh.cube, fresh.rules, exported, "reload");
  CHECK(report.rows_loaded == 1728);
  CHECK(report.rejected.empty());
  for (std::size_t i = 0; i < model.cube.size(); ++i) {
    if (model.cube.provenance(i).kind != pm::ProvenanceKind::data) continue;
    REQUIRE(fresh.cube.value(i).bits() == model.cube.value(i).bits());
  }
  CHECK(pm::export_long_csv(fresh.cube, {}, pm::ExportLayer::data) == exported);
}

TEST_CASE("export layers and member filters") {
  auto model = pmtest::lighting_model();
  pmtest::fill_synthetic(model, 2);
  pm::apply_rules(model.cube, model.rules);
  auto lines = [](const std::string& csv) { return static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1; };
  CHECK(lines(pm::export_long_csv(model.cube, {}, pm::ExportLayer::data)) == 1728);
  CHECK(lines(pm::export_long_csv(model.cube, {}, pm::ExportLayer::calculated)) == 10872);
  CHECK(lines(pm::export_long_csv(model.cube, {}, pm::ExportLayer::all)) == 12600);
  CHECK(lines(pm::export_long_csv(model.cube, {}, pm::ExportLayer::overrides)) == 0);
  pm::MemberFilter europe = {{"ORG", {"Europe"}}, {"SCENARIO", {"Budget", "Actuals"}}};
  CHECK(lines(pm::export_long_csv(model.cube, europe, pm::ExportLayer::data)) == 1728 / 6);
  CHECK_THROWS_AS(pm::export_long_csv(model.cube, {{"ORG", {"Mars"}}}, pm::ExportLayer::data), pm::Error);
}

TEST_CASE("the cell ledger explains every non-empty cell") {
  auto model = pmtest::lighting_model();
  pm::load_csv_file(model.cube, model.rules, pmtest::repo_path("data/europe_budget.csv"), "budget");
  pm::apply_rules(model.cube, model.rules);
  auto ledger = pm::export_cell_ledger(model.cube, model.rules);
  auto records = pm::parse_csv(ledger);
  REQUIRE(records.size() == 1 + 80 + 10872);
  CHECK(records[0].fields == std::vector<std::string>{"ACCTS", "TIME", "PRODUCT", "ORG", "SCENARIO", "Value",
                                                      "Provenance", "Source", "Rule", "Formula"});
  bool found = false;
  for (const auto& r : records) {
    if (r.fields[0] == "Net sales" && r.fields[1] == "Qtr1" && r.fields[2] == "Outdoor" && r.fields[3] == "Europe" &&
        r.fields[4] == "Budget") {
      found = true;
      CHECK(r.fields[6] == "RULE");
      CHECK(r.fields[7] == "6");
      CHECK(r.fields[8] == "ACCTS - Net sales");
      CHECK(r.fields[9] == "{Total sales} - {Discounts and allowances}");
      CHECK(std::abs(std::stod(r.fields[5]) - 9863.2576) < 1e-4);
    }
  }
  CHECK(found);
  // Stable output for identical inputs.
  CHECK(pm::export_cell_ledger(model.cube, model.rules) == ledger);
}

TEST_CASE("model files round-trip through the canonical form") {
  for (const char* path : {"models/lighting.json", "models/income_statement.json", "models/margin_report.json"}) {
    INFO(path);
    auto doc = pmtest::read_document(path);
    auto text = pm::format_model_document(doc);
    auto again = pm::parse_model_document(text);
    CHECK(pm::format_model_document(again) == text);
    CHECK(again.rules == doc.rules);

    auto model = pm::build_model(doc);
    auto tmp = std::filesystem::temp_directory_path() / "pivotmodel_roundtrip.json";
    pm::save_model(tmp.string(), *model.structure, model.rules);
    auto loaded = pm::load_model(tmp.string());
    CHECK(pm::format_model_document(pm::document_of(*loaded.structure, loaded.rules)) ==
          pm::format_model_document(pm::document_of(*model.structure, model.rules)));
    std::filesystem::remove(tmp);
  }
}

TEST_CASE("malformed model files are parse errors naming the problem") {
  auto code_of = [](const std::string& text) {
    try {
      pm::parse_model_document(text);
    } catch (const pm::Error& e) {
      return e.code();
    }
    return pm::ErrorCode::io;
  };
  CHECK(code_of("{") == pm::ErrorCode::parse);
  CHECK(code_of("[]") == pm::ErrorCode::parse);
  CHECK(code_of(R"({"format_version": 2, "name": "x", "dimensions": [], "rules": []})") == pm::ErrorCode::parse);
  CHECK(code_of(R"({"format_version": 1, "name": "x", "dimensions": [{"members": []}], "rules": []})") ==
        pm::ErrorCode::parse);
  CHECK(code_of(R"({"format_version": 1, "name": "x", "dimensions": [], "rules": [{"name": 3}]})") ==
        pm::ErrorCode::parse);
  CHECK_THROWS_AS(pm::load_model("/nonexistent/model.json"), pm::Error);
}
