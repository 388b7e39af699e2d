#include "pivotmodel/data_io.hpp"

#include <unordered_map>

#include "pivotmodel/csv.hpp"
#include "pivotmodel/error.hpp"

namespace pivotmodel {

namespace {

struct PendingCell {
  std::size_t linear;
  double value;
  std::size_t line;
};

// Applies accepted cells in file order; later rows win.
void commit(Cube& cube, const std::vector<PendingCell>& cells, std::string_view source, LoadTarget target,
            LoadReport& report) {
  std::unordered_map<std::size_t, std::size_t> first_line;
  auto kind = target == LoadTarget::data ? ProvenanceKind::data : ProvenanceKind::override_pin;
  Provenance p{kind, cube.intern_source(source)};
  for (const auto& cell : cells) {
    auto [it, inserted] = first_line.emplace(cell.linear, cell.line);
    if (!inserted) {
      report.warnings.push_back({cell.line, "address already loaded at line " + std::to_string(it->second) +
                                                "; this row wins"});
      it->second = cell.line;
    }
    cube.store(cell.linear, CellValue::number(cell.value), p);
  }
  report.cells_written = first_line.size();
}

}  // namespace

LoadReport load_long_csv(Cube& cube, const RuleSet& rules, std::string_view csv_text, std::string_view source,
                         LoadTarget target) {
  const auto& s = cube.structure();
  auto records = parse_csv(csv_text);
  if (records.empty()) throw Error(ErrorCode::data, "data file has no header row");

  const auto& header = records.front().fields;
  std::vector<std::optional<std::size_t>> column_dim(header.size());
  std::optional<std::size_t> value_col;
  std::vector<bool> seen(s.dimension_count(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (fold_case(header[c]) == "value") {
      if (value_col) throw Error(ErrorCode::data, "header has two Value columns");
      value_col = c;
      continue;
    }
    auto d = s.find_dimension(header[c]);
    if (!d) throw Error(ErrorCode::data, "header column '" + header[c] + "' is not a dimension or Value");
    if (seen[*d]) throw Error(ErrorCode::data, "header names dimension " + header[c] + " twice");
    seen[*d] = true;
    column_dim[c] = *d;
  }
  if (!value_col) throw Error(ErrorCode::data, "header has no Value column");
  for (std::size_t d = 0; d < s.dimension_count(); ++d) {
    if (!seen[d]) throw Error(ErrorCode::data, "header is missing dimension " + s.dimension(d).name());
  }

  auto leaves = rules.leaf_mask(s);
  LoadReport report;
  std::vector<PendingCell> accepted;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    ++report.rows_total;
    auto reject = [&](std::string reason) { report.rejected.push_back({rec.line, std::move(reason)}); };
    if (rec.fields.size() != header.size()) {
      reject("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(rec.fields.size()));
      continue;
    }
    CellAddress address;
    address.ordinals.assign(s.dimension_count(), 0);
    std::string problem;
    for (std::size_t c = 0; c < header.size() && problem.empty(); ++c) {
      if (!column_dim[c]) continue;
      const auto& dim = s.dimension(*column_dim[c]);
      auto m = dim.find(rec.fields[c]);
      if (!m) {
        problem = "unknown member '" + rec.fields[c] + "' in " + dim.name();
      } else {
        address.ordinals[*column_dim[c]] = *m;
      }
    }
    if (!problem.empty()) {
      reject(problem);
      continue;
    }
    auto value = parse_number(rec.fields[*value_col]);
    if (!value) {
      reject("non-numeric value '" + rec.fields[*value_col] + "'");
      continue;
    }
    if (target == LoadTarget::data && !is_input_eligible(leaves, address)) {
      reject("aggregate member not loadable: " + s.describe(address));
      continue;
    }
    accepted.push_back({s.linear_index(address), *value, rec.line});
    ++report.rows_loaded;
  }
  commit(cube, accepted, source, target, report);
  return report;
}

LoadReport load_wide_csv(Cube& cube, const RuleSet& rules, std::string_view csv_text, std::string_view source,
                         std::optional<std::string> spread_dimension) {
  const auto& s = cube.structure();
  auto records = parse_csv(csv_text);
  if (records.empty()) throw Error(ErrorCode::data, "data file has no header row");
  const auto& header = records.front().fields;

  std::optional<std::size_t> spread;
  if (spread_dimension) spread = s.dimension_index(*spread_dimension);

  std::vector<std::optional<std::size_t>> column_dim(header.size());
  std::vector<bool> pinned(s.dimension_count(), false);
  std::vector<std::size_t> member_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto d = s.find_dimension(header[c]);
    if (d && d != spread) {
      if (pinned[*d]) throw Error(ErrorCode::data, "header names dimension " + header[c] + " twice");
      pinned[*d] = true;
      column_dim[c] = *d;
    } else {
      member_cols.push_back(c);
    }
  }
  if (member_cols.empty()) throw Error(ErrorCode::data, "header has no member columns to spread");

  if (!spread) {
    for (auto c : member_cols) {
      std::vector<std::size_t> candidates;
      for (std::size_t d = 0; d < s.dimension_count(); ++d) {
        if (!pinned[d] && s.dimension(d).find(header[c])) candidates.push_back(d);
      }
      if (candidates.empty()) {
        throw Error(ErrorCode::data, "header column '" + header[c] + "' matches no dimension or member");
      }
      if (candidates.size() > 1) {
        throw Error(ErrorCode::data, "header column '" + header[c] + "' is a member of both " +
                                         s.dimension(candidates[0]).name() + " and " +
                                         s.dimension(candidates[1]).name());
      }
      if (spread && *spread != candidates[0]) {
        throw Error(ErrorCode::data, "member columns span dimensions " + s.dimension(*spread).name() + " and " +
                                         s.dimension(candidates[0]).name());
      }
      spread = candidates[0];
    }
  }
  std::vector<std::size_t> column_member(header.size(), 0);
  for (auto c : member_cols) {
    auto m = s.dimension(*spread).find(header[c]);
    if (!m) {
      throw Error(ErrorCode::data, "header column '" + header[c] + "' is not a member of " + s.dimension(*spread).name());
    }
    column_member[c] = *m;
  }
  for (std::size_t d = 0; d < s.dimension_count(); ++d) {
    if (d != *spread && !pinned[d]) {
      throw Error(ErrorCode::data, "header is missing dimension column " + s.dimension(d).name());
    }
  }

  auto leaves = rules.leaf_mask(s);
  LoadReport report;
  std::vector<PendingCell> accepted;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    ++report.rows_total;
    if (rec.fields.size() != header.size()) {
      report.rejected.push_back({rec.line, "expected " + std::to_string(header.size()) + " fields, got " +
                                               std::to_string(rec.fields.size())});
      continue;
    }
    CellAddress address;
    address.ordinals.assign(s.dimension_count(), 0);
    std::string problem;
    for (std::size_t c = 0; c < header.size() && problem.empty(); ++c) {
      if (!column_dim[c]) continue;
      const auto& dim = s.dimension(*column_dim[c]);
      if (auto m = dim.find(rec.fields[c])) {
        address.ordinals[*column_dim[c]] = *m;
      } else {
        problem = "unknown member '" + rec.fields[c] + "' in " + dim.name();
      }
    }
    std::vector<PendingCell> row_cells;
    for (auto c : member_cols) {
      if (!problem.empty()) break;
      if (rec.fields[c].find_first_not_of(" \t") == std::string::npos) continue;
      auto value = parse_number(rec.fields[c]);
      if (!value) {
        problem = "non-numeric value '" + rec.fields[c] + "' in column " + header[c];
        break;
      }
      address.ordinals[*spread] = column_member[c];
      if (!is_input_eligible(leaves, address)) {
        problem = "aggregate member not loadable: " + s.describe(address);
        break;
      }
      row_cells.push_back({s.linear_index(address), *value, rec.line});
    }
    if (!problem.empty()) {
      report.rejected.push_back({rec.line, problem});
      continue;
    }
    accepted.insert(accepted.end(), row_cells.begin(), row_cells.end());
    ++report.rows_loaded;
  }
  commit(cube, accepted, source, LoadTarget::data, report);
  return report;
}

DataFormat detect_format(std::string_view csv_text) {
  auto records = parse_csv(csv_text.substr(0, csv_text.find('\n')));
  if (!records.empty()) {
    for (const auto& f : records.front().fields) {
      if (fold_case(f) == "value") return DataFormat::long_format;
    }
  }
  return DataFormat::wide_format;
}

LoadReport load_csv_file(Cube& cube, const RuleSet& rules, const std::string& path, std::string_view source) {
  auto text = read_text_file(path);
  if (detect_format(text) == DataFormat::long_format) return load_long_csv(cube, rules, text, source);
  return load_wide_csv(cube, rules, text, source);
}

std::string export_long_csv(const Cube& cube, const MemberFilter& filter, ExportLayer layer) {
  const auto& s = cube.structure();
  std::vector<std::optional<std::vector<bool>>> keep(s.dimension_count());
  for (const auto& [dim, members] : filter) {
    auto d = s.dimension_index(dim);
    std::vector<bool> mask(s.dimension(d).size(), false);
    for (const auto& m : members) mask[s.dimension(d).ordinal_of(m)] = true;
    keep[d] = std::move(mask);
  }

  CsvWriter w;
  for (const auto& dim : s.dimensions()) w.field(dim.name());
  w.field("Value").end_row();
  for (std::size_t i = 0; i < cube.size(); ++i) {
    auto kind = cube.provenance(i).kind;
    bool wanted = false;
    switch (layer) {
      case ExportLayer::data: wanted = kind == ProvenanceKind::data; break;
      case ExportLayer::calculated: wanted = kind == ProvenanceKind::rule || kind == ProvenanceKind::override_pin; break;
      case ExportLayer::overrides: wanted = kind == ProvenanceKind::override_pin; break;
      case ExportLayer::all: wanted = kind != ProvenanceKind::empty; break;
    }
    if (!wanted) continue;
    bool kept = true;
    for (std::size_t d = 0; d < keep.size() && kept; ++d) {
      kept = !keep[d] || (*keep[d])[s.coordinate(i, d)];
    }
    if (!kept) continue;
    for (std::size_t d = 0; d < s.dimension_count(); ++d) w.field(s.dimension(d).member(s.coordinate(i, d)).name);
    w.field(format_value(cube.value(i))).end_row();
  }
  return w.take();
}

std::string export_cell_ledger(const Cube& cube, const RuleSet& rules) {
  const auto& s = cube.structure();
  std::vector<std::string> formulas;
  for (const auto& r : rules.rules()) formulas.push_back(r.display_text());

  CsvWriter w;
  for (const auto& dim : s.dimensions()) w.field(dim.name());
  w.field("Value").field("Provenance").field("Source").field("Rule").field("Formula").end_row();
  for (std::size_t i = 0; i < cube.size(); ++i) {
    auto p = cube.provenance(i);
    if (p.kind == ProvenanceKind::empty) continue;
    for (std::size_t d = 0; d < s.dimension_count(); ++d) w.field(s.dimension(d).member(s.coordinate(i, d)).name);
    w.field(format_value(cube.value(i))).field(to_string(p.kind));
    if (p.kind == ProvenanceKind::rule) {
      w.field(std::to_string(p.ref)).field(cube.rule_name(p.ref));
      // Formula text only when the rule set still matches the last calculation.
      bool current = p.ref <= rules.size() && rules[p.ref - 1].name() == cube.rule_name(p.ref);
      w.field(current ? formulas[p.ref - 1] : std::string());
    } else {
      w.field(cube.source_name(p.ref)).field("").field("");
    }
    w.end_row();
  }
  return w.take();
}

}  // namespace pivotmodel
