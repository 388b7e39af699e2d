#include "pivotmodel/json_codec.hpp"

#include "pivotmodel/error.hpp"

namespace pivotmodel {

namespace {

std::vector<std::string> string_list(const Json& v, const char* where) {
  if (!v.is_array()) throw Error(ErrorCode::parse, std::string(where) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw Error(ErrorCode::parse, std::string(where) + " must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::map<std::string, std::vector<std::string>> member_lists(const Json& v, const char* where) {
  if (!v.is_object()) throw Error(ErrorCode::parse, std::string(where) + " must be an object of member lists");
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [dim, members] : v.items()) out[dim] = string_list(members, where);
  return out;
}

Json provenance_json(const Cube& cube, std::size_t linear) {
  auto p = cube.provenance(linear);
  Json j;
  j["kind"] = to_string(p.kind);
  if (p.kind == ProvenanceKind::data || p.kind == ProvenanceKind::override_pin) {
    j["source"] = cube.source_name(p.ref);
  } else if (p.kind == ProvenanceKind::rule) {
    j["sequence"] = p.ref;
    j["rule"] = cube.rule_name(p.ref);
  }
  return j;
}

}  // namespace

Json to_json(CellValue v) {
  if (v.is_error()) return std::string(error_text(v.error()));
  return v.number();
}

Json address_to_json(const ModelStructure& s, const CellAddress& address) {
  Json j = Json::object();
  for (std::size_t d = 0; d < s.dimension_count(); ++d) {
    j[s.dimension(d).name()] = s.dimension(d).member(address.ordinals.at(d)).name;
  }
  return j;
}

NamedAddress named_address_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse, "address must be an object of DIMENSION: member");
  NamedAddress out;
  for (const auto& [dim, member] : j.items()) {
    if (!member.is_string()) throw Error(ErrorCode::parse, "address member for '" + dim + "' must be a string");
    out.emplace_back(dim, member.get<std::string>());
  }
  return out;
}

ViewSpec view_spec_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse, "view spec must be an object");
  ViewSpec spec;
  if (j.contains("pages")) {
    const auto& pages = j["pages"];
    if (pages.is_object()) {
      for (const auto& [dim, member] : pages.items()) {
        if (!member.is_string()) throw Error(ErrorCode::parse, "page member for '" + dim + "' must be a string");
        spec.pages.emplace_back(dim, member.get<std::string>());
      }
    } else if (pages.is_array()) {
      for (const auto& pair : pages) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
          throw Error(ErrorCode::parse, "pages entries must be [dimension, member] pairs");
        }
        spec.pages.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    } else {
      throw Error(ErrorCode::parse, "pages must be an object or an array of pairs");
    }
  }
  if (j.contains("rows")) spec.rows = string_list(j["rows"], "rows");
  if (j.contains("cols")) spec.cols = string_list(j["cols"], "cols");
  if (j.contains("expand")) spec.expand = member_lists(j["expand"], "expand");
  if (j.contains("member_selection")) spec.member_selection = member_lists(j["member_selection"], "member_selection");
  return spec;
}

Json to_json(const ViewSpec& spec) {
  Json j;
  j["pages"] = Json::object();
  for (const auto& [dim, member] : spec.pages) j["pages"][dim] = member;
  j["rows"] = spec.rows;
  j["cols"] = spec.cols;
  if (!spec.expand.empty()) j["expand"] = spec.expand;
  if (!spec.member_selection.empty()) j["member_selection"] = spec.member_selection;
  return j;
}

Json to_json(const ViewGrid& grid) {
  Json j;
  j["model_version"] = grid.model_version;
  j["row_dimensions"] = grid.row_dimensions;
  j["col_dimensions"] = grid.col_dimensions;
  j["row_headers"] = grid.row_headers;
  j["col_headers"] = grid.col_headers;
  Json values = Json::array();
  Json flags = Json::array();
  for (std::size_t r = 0; r < grid.row_count(); ++r) {
    Json vrow = Json::array();
    Json frow = Json::array();
    for (std::size_t c = 0; c < grid.col_count(); ++c) {
      vrow.push_back(to_json(grid.at(r, c)));
      frow.push_back(to_string(grid.flag(r, c)));
    }
    values.push_back(std::move(vrow));
    flags.push_back(std::move(frow));
  }
  j["values"] = std::move(values);
  j["flags"] = std::move(flags);
  return j;
}

Json to_json(const CalcReport& report) {
  Json j;
  j["cells_written"] = report.cells_written;
  j["overwrites"] = report.overwrites;
  j["contested_cells"] = report.contested_cells;
  j["skipped_pinned"] = report.skipped_pinned;
  j["duration_ms"] = report.duration_ms;
  Json rules = Json::array();
  for (const auto& r : report.rules) {
    rules.push_back({{"sequence", r.sequence}, {"name", r.name}, {"cells_written", r.cells_written}});
  }
  j["rules"] = std::move(rules);
  return j;
}

Json to_json(const LoadReport& report) {
  auto issues = [](const std::vector<RowIssue>& v) {
    Json a = Json::array();
    for (const auto& i : v) a.push_back({{"line", i.line}, {"reason", i.reason}});
    return a;
  };
  Json j;
  j["rows_total"] = report.rows_total;
  j["rows_loaded"] = report.rows_loaded;
  j["cells_written"] = report.cells_written;
  j["rejected"] = issues(report.rejected);
  j["warnings"] = issues(report.warnings);
  return j;
}

Json to_json(const ModelStats& stats, std::size_t rule_count) {
  Json j;
  j["total_cells"] = stats.total_cells;
  j["input_cells"] = stats.input_cells;
  j["calculated_cells"] = stats.calculated_cells;
  j["rules"] = rule_count;
  return j;
}

Json structure_to_json(const ModelStructure& s) {
  Json j;
  j["name"] = s.name();
  Json dims = Json::array();
  for (const auto& dim : s.dimensions()) {
    Json members = Json::array();
    for (std::size_t m = 0; m < dim.size(); ++m) {
      const auto& member = dim.member(m);
      Json mj;
      mj["name"] = member.name;
      if (!member.aliases.empty()) mj["aliases"] = member.aliases;
      mj["parent"] = member.parent ? Json(dim.member(*member.parent).name) : Json(nullptr);
      Json children = Json::array();
      for (auto c : dim.children(m)) children.push_back(dim.member(c).name);
      mj["children"] = std::move(children);
      if (!member.format.empty()) mj["format"] = member.format;
      members.push_back(std::move(mj));
    }
    dims.push_back({{"name", dim.name()}, {"members", std::move(members)}});
  }
  j["dimensions"] = std::move(dims);
  return j;
}

Json rules_to_json(const RuleSet& rules) {
  Json a = Json::array();
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    Json j;
    j["sequence"] = i + 1;
    j["name"] = r.name();
    j["dimension"] = r.spec.dimension;
    j["target"] = r.spec.target;
    j["formula"] = r.spec.formula;
    j["display"] = r.display_text();
    j["enabled"] = r.enabled();
    if (!r.spec.filters.empty()) {
      Json f = Json::object();
      for (const auto& [dim, members] : r.spec.filters) f[dim] = members;
      j["filters"] = std::move(f);
    }
    if (!r.spec.folder.empty()) j["folder"] = r.spec.folder;
    a.push_back(std::move(j));
  }
  return a;
}

Json lint_to_json(const ModelStructure& s, const std::vector<LintFinding>& findings) {
  Json a = Json::array();
  for (const auto& f : findings) {
    Json j;
    j["kind"] = to_string(f.kind);
    j["message"] = f.message;
    j["dimension"] = s.dimension(f.dimension).name();
    if (f.member) j["member"] = s.dimension(f.dimension).member(*f.member).name;
    Json seq = Json::array();
    for (auto r : f.rules) seq.push_back(r + 1);
    j["rules"] = std::move(seq);
    a.push_back(std::move(j));
  }
  return a;
}

Json to_json(const Cube& cube, const RuleSet& rules, const TraceNode& node) {
  const auto& s = cube.structure();
  Json j;
  j["label"] = node.label;
  j["address"] = address_to_json(s, node.address);
  j["value"] = to_json(node.value);
  j["provenance"] = provenance_json(cube, s.linear_index(node.address));
  if (node.rule) {
    j["rule"] = rules[*node.rule].name();
    j["rule_sequence"] = *node.rule + 1;
    j["winning_rule"] = node.winning_rule;
  }
  j["rule_text"] = node.rule_text;
  j["applicable_rules"] = Json::array();
  for (auto r : applicable_rules(rules, s, node.address)) j["applicable_rules"].push_back(rules[r].name());
  Json children = Json::array();
  for (const auto& child : node.children) children.push_back(to_json(cube, rules, child));
  j["children"] = std::move(children);
  return j;
}

Json to_json(const Cube& cube, const RuleSet& rules, const DecompositionReport& report) {
  Json j;
  j["address"] = address_to_json(cube.structure(), report.address);
  j["stored"] = to_json(report.stored);
  j["consistent"] = report.consistent();
  Json a = Json::array();
  for (const auto& r : report.rules) {
    a.push_back({{"rule", rules[r.rule].name()},
                 {"sequence", r.rule + 1},
                 {"value", to_json(r.value)},
                 {"agrees", r.agrees},
                 {"winner", r.winner}});
  }
  j["rules"] = std::move(a);
  return j;
}

}  // namespace pivotmodel
