// pivotmodel: batch driver and API server for PivotModel files.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pivotmodel/csv.hpp"
#include "pivotmodel/data_io.hpp"
#include "pivotmodel/error.hpp"
#include "pivotmodel/lint.hpp"
#include "pivotmodel/model_file.hpp"
#include "pivotmodel/service.hpp"
#include "pivotmodel/trace.hpp"
#include "pivotmodel/view.hpp"
#include "pivotmodel/json_codec.hpp"

namespace pm = pivotmodel;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kData = 3, kInternal = 4 };

int exit_code_of(pm::ErrorCode code) {
  switch (code) {
    case pm::ErrorCode::data:
    case pm::ErrorCode::io: return kData;
    default: return kValidation;
  }
}

struct Options {
  std::string model;
  std::vector<std::string> data;
  bool allow_rejects = false;
  std::string out;
};

// Writes to --out when given, stdout otherwise.
void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
  } else {
    pm::write_text_file(opt.out, text);
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Loads the model and data files. Returns kOk or kData when rows were rejected
// without --allow-rejects.
int load(const Options& opt, std::optional<pm::Model>& model) {
  model.emplace(pm::load_model(opt.model));
  std::size_t rejected = 0;
  for (const auto& path : opt.data) {
    auto source = std::filesystem::path(path).stem().string();
    auto report = pm::load_csv_file(model->cube, model->rules, path, source);
    for (const auto& issue : report.rejected) std::cerr << path << ":" << issue.line << ": rejected: " << issue.reason << "\n";
    for (const auto& issue : report.warnings) std::cerr << path << ":" << issue.line << ": warning: " << issue.reason << "\n";
    std::cerr << path << ": " << report.rows_loaded << " of " << report.rows_total << " rows loaded, "
              << report.cells_written << " cells\n";
    rejected += report.rejected.size();
  }
  if (rejected > 0 && !opt.allow_rejects) {
    std::cerr << "error: " << rejected << " rows rejected (use --allow-rejects to continue)\n";
    return kData;
  }
  return kOk;
}

pm::CalcReport calculate(pm::Model& model) {
  auto report = pm::apply_rules(model.cube, model.rules);
  std::cerr << "calc: " << report.cells_written << " cells written in " << report.duration_ms << " ms\n";
  return report;
}

void add_model_options(CLI::App* cmd, Options& opt, bool with_data) {
  cmd->add_option("model", opt.model, "Model file (JSON)")->required()->check(CLI::ExistingFile);
  if (with_data) {
    cmd->add_option("--data", opt.data, "Data file(s), long or wide CSV")->check(CLI::ExistingFile);
    cmd->add_flag("--allow-rejects", opt.allow_rejects, "Continue when data rows are rejected");
  }
}

int run_validate(const Options& opt) {
  auto model = pm::load_model(opt.model);
  const auto& s = *model.structure;
  std::cout << "model: " << s.name() << "\n";
  for (const auto& dim : s.dimensions()) std::cout << "dimension " << dim.name() << ": " << dim.size() << " members\n";
  std::cout << "rules: " << model.rules.size() << " bound, " << model.rules.enabled_count() << " enabled\n";
  auto findings = pm::coverage_lint(s, model.rules);
  for (const auto& f : findings) std::cout << pm::to_string(f.kind) << ": " << f.message << "\n";
  std::cout << (findings.empty() ? "clean\n" : std::to_string(findings.size()) + " findings\n");
  return findings.empty() ? kOk : kValidation;
}

int run_calc(const Options& opt) {
  std::optional<pm::Model> model;
  if (int rc = load(opt, model)) return rc;
  auto report = calculate(*model);
  emit(opt, pm::export_cell_ledger(model->cube, model->rules));
  for (const auto& r : report.rules) std::cout << r.sequence << ". " << r.name << ": " << r.cells_written << " cells\n";
  std::cout << "cells_written=" << report.cells_written << " overwrites=" << report.overwrites
            << " contested=" << report.contested_cells << " skipped_pinned=" << report.skipped_pinned << "\n";
  return kOk;
}

int run_export(const Options& opt, const std::string& layer_name) {
  std::optional<pm::Model> model;
  if (int rc = load(opt, model)) return rc;
  pm::ExportLayer layer;
  if (layer_name == "data") {
    layer = pm::ExportLayer::data;
  } else if (layer_name == "calculated") {
    layer = pm::ExportLayer::calculated;
  } else {
    layer = pm::ExportLayer::all;
  }
  if (layer != pm::ExportLayer::data) calculate(*model);
  emit(opt, pm::export_long_csv(model->cube, {}, layer));
  return kOk;
}

int run_view(const Options& opt, const std::string& spec_path) {
  std::optional<pm::Model> model;
  if (int rc = load(opt, model)) return rc;
  calculate(*model);
  pm::Json spec_json;
  try {
    spec_json = pm::Json::parse(pm::read_text_file(spec_path));
  } catch (const pm::Json::exception& e) {
    throw pm::Error(pm::ErrorCode::parse, "malformed view spec " + spec_path, e.what());
  }
  auto start = std::chrono::steady_clock::now();
  auto grid = pm::materialize_view(model->cube, model->rules, pm::view_spec_from_json(spec_json));
  std::cerr << "view: " << grid.row_count() << "x" << grid.col_count() << " in " << elapsed_ms(start) << " ms\n";
  emit(opt, pm::view_to_csv(grid));
  return kOk;
}

// "2,4:ORG - Total Company,2" -> operand positions, each optionally along a named rule.
std::vector<pm::DrillStep> parse_drill(const std::string& text, const pm::RuleSet& rules) {
  std::vector<pm::DrillStep> steps;
  for (const auto& rec : pm::parse_csv(text)) {
    for (const auto& field : rec.fields) {
      pm::DrillStep step;
      auto colon = field.find(':');
      try {
        step.operand = std::stoul(field.substr(0, colon));
      } catch (const std::exception&) {
        throw pm::Error(pm::ErrorCode::validation, "drill step must start with an operand number", field);
      }
      if (colon != std::string::npos) step.rule = rules.index_of(field.substr(colon + 1));
      steps.push_back(step);
    }
  }
  return steps;
}

int run_trace(const Options& opt, const std::string& cell, const std::string& rule_name, std::size_t depth,
              const std::string& drill) {
  std::optional<pm::Model> model;
  if (int rc = load(opt, model)) return rc;
  calculate(*model);
  const auto& s = *model->structure;
  auto address = s.resolve(pm::parse_named_address(cell));
  std::vector<pm::TraceNode> blocks;
  if (!drill.empty() || !rule_name.empty()) {
    std::optional<std::size_t> rule;
    if (!rule_name.empty()) rule = model->rules.index_of(rule_name);
    auto steps = parse_drill(drill, model->rules);
    blocks = pm::drill_path(model->cube, model->rules, address, rule, steps);
  } else {
    blocks = pm::drill_winning(model->cube, model->rules, address, depth);
  }
  emit(opt, pm::export_trace_csv(s, blocks));
  return kOk;
}

int run_docs(const Options& opt, std::string format) {
  auto model = pm::load_model(opt.model);
  if (format.empty()) format = opt.out.size() >= 4 && opt.out.substr(opt.out.size() - 4) == ".txt" ? "text" : "csv";
  if (format == "text") {
    emit(opt, pm::render_docs_text(*model.structure, model.rules));
  } else {
    emit(opt, pm::export_docs_csv(*model.structure, model.rules));
  }
  return kOk;
}

int run_stats(const Options& opt) {
  auto start = std::chrono::steady_clock::now();
  auto model = pm::load_model(opt.model);
  auto st = pm::stats(*model.structure, model.rules);
  std::cout << "cells=" << st.total_cells << " input=" << st.input_cells << " calculated=" << st.calculated_cells
            << " rules=" << model.rules.size() << "\n";
  std::cerr << "stats: " << elapsed_ms(start) << " ms\n";
  return kOk;
}

int run_audit(const Options& opt) {
  std::optional<pm::Model> model;
  if (int rc = load(opt, model)) return rc;
  calculate(*model);
  const auto& s = *model->structure;
  for (const auto& f : pm::coverage_lint(s, model->rules)) std::cout << pm::to_string(f.kind) << ": " << f.message << "\n";
  auto reports = pm::model_audit(model->cube, model->rules);
  pm::CsvWriter w;
  for (const auto& dim : s.dimensions()) w.field(dim.name());
  w.field("Stored").field("Rule").field("Value").field("Agrees").end_row();
  for (const auto& r : reports) {
    for (const auto& d : r.rules) {
      for (const auto& m : s.member_names(r.address)) w.field(m);
      w.field(pm::format_value(r.stored)).field(model->rules[d.rule].name()).field(pm::format_value(d.value));
      w.field(d.agrees ? "yes" : "no").end_row();
    }
  }
  emit(opt, w.str());
  std::cout << reports.size() << " cells where applicable rules disagree\n";
  return kOk;
}

pm::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int run_serve(const std::string& listen, const std::string& model_dir, std::size_t max_body) {
  pm::ServiceConfig config;
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    throw pm::Error(pm::ErrorCode::validation, "--listen expects HOST:PORT", listen);
  }
  config.host = listen.substr(0, colon);
  try {
    config.port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw pm::Error(pm::ErrorCode::validation, "--listen expects HOST:PORT", listen);
  }
  config.model_dir = model_dir;
  config.max_body_bytes = max_body;
  pm::Service service(config);
  if (!model_dir.empty()) {
    std::filesystem::create_directories(model_dir);
    std::cerr << "restored " << service.load_persisted() << " models from " << model_dir << "\n";
  }
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << config.host << ":" << config.port << "\n";
  bool ok = service.serve();
  g_service = nullptr;
  if (!ok) {
    std::cerr << "error: cannot listen on " << listen << "\n";
    return kInternal;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PivotModel: multidimensional planning models with ordered business rules"};
  app.require_subcommand(1);
  Options opt;

  auto* validate = app.add_subcommand("validate", "Bind the model and report coverage findings");
  add_model_options(validate, opt, false);

  auto* calc = app.add_subcommand("calc", "Load data, calculate, and write the cell ledger");
  add_model_options(calc, opt, true);
  calc->add_option("--out", opt.out, "Ledger CSV (default stdout)");

  std::string layer = "data";
  auto* exp = app.add_subcommand("export", "Load data and export a layer in long format");
  add_model_options(exp, opt, true);
  exp->add_option("--layer", layer, "data, calculated or all")->check(CLI::IsMember({"data", "calculated", "all"}));
  exp->add_option("--out", opt.out, "Output CSV (default stdout)");

  std::string spec_path;
  auto* view = app.add_subcommand("view", "Materialize a view spec to CSV");
  add_model_options(view, opt, true);
  view->add_option("--spec", spec_path, "View spec (JSON)")->required()->check(CLI::ExistingFile);
  view->add_option("--out", opt.out, "Grid CSV (default stdout)");

  std::string cell, rule_name, drill;
  std::size_t depth = 1;
  auto* tr = app.add_subcommand("trace", "Export the calculation trace of one cell");
  add_model_options(tr, opt, true);
  tr->add_option("--cell", cell, "Cell address, e.g. \"ACCTS=Net sales,TIME=Qtr1,...\"")->required();
  tr->add_option("--rule", rule_name, "Rule to trace the root cell along (default: the winning rule)");
  tr->add_option("--depth", depth, "Levels to follow along winning rules")->check(CLI::PositiveNumber);
  tr->add_option("--drill", drill, "Operand path, e.g. \"1,2:RULE NAME,4\" (overrides --depth)");
  tr->add_option("--out", opt.out, "Trace CSV (default stdout)");

  std::string docs_format;
  auto* docs = app.add_subcommand("docs", "Export model documentation");
  add_model_options(docs, opt, false);
  docs->add_option("--format", docs_format, "csv or text (default: text for .txt outputs)")
      ->check(CLI::IsMember({"csv", "text"}));
  docs->add_option("--out", opt.out, "Output file (default stdout)");

  auto* st = app.add_subcommand("stats", "Print cell accounting");
  add_model_options(st, opt, false);

  auto* audit = app.add_subcommand("audit", "List cells where applicable rules disagree");
  add_model_options(audit, opt, true);
  audit->add_option("--out", opt.out, "Disagreement CSV (default stdout)");

  std::string listen = "127.0.0.1:8080", model_dir;
  std::size_t max_body = 64u << 20;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP/JSON API");
  serve->add_option("--listen", listen, "HOST:PORT")->envname("PIVOTMODEL_LISTEN");
  serve->add_option("--model-dir", model_dir, "Directory for persisted models")->envname("PIVOTMODEL_MODEL_DIR");
  serve->add_option("--max-body-bytes", max_body, "Largest accepted request body")->envname("PIVOTMODEL_MAX_BODY");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return run_validate(opt);
    if (*calc) return run_calc(opt);
    if (*exp) return run_export(opt, layer);
    if (*view) return run_view(opt, spec_path);
    if (*tr) return run_trace(opt, cell, rule_name, depth, drill);
    if (*docs) return run_docs(opt, docs_format);
    if (*st) return run_stats(opt);
    if (*audit) return run_audit(opt);
    if (*serve) return run_serve(listen, model_dir, max_body);
  } catch (const pm::Error& e) {
    std::cerr << "error: " << e.what();
    if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
    std::cerr << "\n";
    return exit_code_of(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
