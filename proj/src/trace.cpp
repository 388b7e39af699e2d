#include "pivotmodel/trace.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "pivotmodel/csv.hpp"
#include "pivotmodel/error.hpp"

namespace pivotmodel {

std::vector<std::size_t> applicable_rules(const RuleSet& rules, const ModelStructure& structure,
                                          const CellAddress& address) {
  structure.linear_index(address);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].enabled() && rules[i].covers(address)) out.push_back(i);
  }
  return out;
}

namespace {

TraceNode leaf_node(const Cube& cube, const RuleSet& rules, std::size_t linear, std::string label) {
  const auto& s = cube.structure();
  TraceNode n;
  n.label = std::move(label);
  n.address = s.address_of(linear);
  n.value = cube.value(linear);
  n.provenance = cube.provenance(linear);
  auto applicable = applicable_rules(rules, s, n.address);
  if (!applicable.empty() && n.provenance.kind == ProvenanceKind::rule) {
    n.rule = applicable.back();
    n.rule_text = rules[applicable.back()].display_text();
    n.winning_rule = true;
  }
  return n;
}

}  // namespace

TraceNode trace(const Cube& cube, const RuleSet& rules, const CellAddress& address, std::optional<std::size_t> rule,
                std::string label) {
  const auto& s = cube.structure();
  auto linear = s.linear_index(address);
  auto applicable = applicable_rules(rules, s, address);
  TraceNode node = leaf_node(cube, rules, linear, std::move(label));
  if (rule) {
    if (std::find(applicable.begin(), applicable.end(), *rule) == applicable.end()) {
      auto name = *rule < rules.size() ? rules[*rule].name() : std::to_string(*rule);
      throw Error(ErrorCode::validation, "rule '" + name + "' is not applicable at " + s.describe(address));
    }
  } else if (!node.rule) {
    return node;
  } else {
    rule = node.rule;
  }
  const auto& r = rules[*rule];
  node.rule = *rule;
  node.rule_text = r.display_text();
  node.winning_rule = *rule == applicable.back();
  for (std::size_t k = 0; k < r.formula.refs.size(); ++k) {
    auto operand = r.formula.refs[k].target(s, linear);
    node.children.push_back(leaf_node(cube, rules, operand, node.label + "." + std::to_string(k + 1)));
  }
  return node;
}

std::vector<TraceNode> drill_path(const Cube& cube, const RuleSet& rules, const CellAddress& root,
                                  std::optional<std::size_t> root_rule, std::span<const DrillStep> steps) {
  std::vector<TraceNode> blocks;
  blocks.push_back(trace(cube, rules, root, root_rule));
  for (const auto& step : steps) {
    const auto& parent = blocks.back();
    if (step.operand < 1 || step.operand > parent.children.size()) {
      throw Error(ErrorCode::validation, "operand " + std::to_string(step.operand) + " does not exist under " +
                                             parent.label);
    }
    const auto& child = parent.children[step.operand - 1];
    blocks.push_back(trace(cube, rules, child.address, step.rule, child.label));
  }
  return blocks;
}

namespace {

void drill_recursive(const Cube& cube, const RuleSet& rules, const CellAddress& address, std::string label,
                     std::size_t depth, std::vector<TraceNode>& out) {
  auto node = trace(cube, rules, address, std::nullopt, std::move(label));
  if (node.children.empty()) return;
  auto children = node.children;
  out.push_back(std::move(node));
  if (depth <= 1) return;
  for (const auto& child : children) drill_recursive(cube, rules, child.address, child.label, depth - 1, out);
}

}  // namespace

std::vector<TraceNode> drill_winning(const Cube& cube, const RuleSet& rules, const CellAddress& root,
                                     std::size_t depth) {
  std::vector<TraceNode> out;
  if (depth == 0) return out;
  drill_recursive(cube, rules, root, "L1", depth, out);
  if (out.empty()) out.push_back(trace(cube, rules, root));
  return out;
}

std::string export_trace_csv(const ModelStructure& structure, std::span<const TraceNode> blocks) {
  CsvWriter w;
  w.field("Level");
  for (const auto& dim : structure.dimensions()) w.field(dim.name());
  w.field("Value").field("Rule").end_row();
  auto row = [&](const TraceNode& n) {
    w.field(n.label);
    for (const auto& name : structure.member_names(n.address)) w.field(name);
    w.field(format_value(n.value)).field(n.rule_text).end_row();
  };
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b) w.blank_row();
    row(blocks[b]);
    for (const auto& child : blocks[b].children) row(child);
  }
  return w.take();
}

std::vector<std::size_t> parse_trace_label(std::string_view label) {
  if (label.substr(0, 2) != "L1") throw Error(ErrorCode::parse, "trace label must start with L1");
  std::vector<std::size_t> out;
  label.remove_prefix(2);
  while (!label.empty()) {
    if (label.front() != '.') throw Error(ErrorCode::parse, "malformed trace label");
    label.remove_prefix(1);
    std::size_t n = 0, used = 0;
    while (used < label.size() && std::isdigit(static_cast<unsigned char>(label[used]))) {
      n = n * 10 + static_cast<std::size_t>(label[used] - '0');
      ++used;
    }
    if (used == 0 || n == 0) throw Error(ErrorCode::parse, "malformed trace label");
    out.push_back(n);
    label.remove_prefix(used);
  }
  return out;
}

bool values_agree(CellValue a, CellValue b) noexcept {
  if (a.is_error() || b.is_error()) return a == b;
  double x = a.number(), y = b.number();
  double diff = std::fabs(x - y);
  return diff <= 1e-12 || diff <= 1e-9 * std::max(std::fabs(x), std::fabs(y));
}

bool DecompositionReport::consistent() const noexcept {
  return std::all_of(rules.begin(), rules.end(), [](const RuleDecomposition& r) { return r.agrees; });
}

namespace {

DecompositionReport check_cell(const Cube& cube, const RuleSet& rules, std::size_t linear,
                               std::span<const std::size_t> applicable) {
  const auto& s = cube.structure();
  DecompositionReport report;
  report.address = s.address_of(linear);
  report.stored = cube.value(linear);
  EvalContext ctx{s, cube.values(), linear};
  for (std::size_t k = 0; k < applicable.size(); ++k) {
    RuleDecomposition d;
    d.rule = applicable[k];
    d.value = evaluate(rules[d.rule].formula, ctx);
    d.agrees = values_agree(d.value, report.stored);
    d.winner = k + 1 == applicable.size();
    report.rules.push_back(d);
  }
  return report;
}

}  // namespace

DecompositionReport decomposition_check(const Cube& cube, const RuleSet& rules, const CellAddress& address) {
  auto applicable = applicable_rules(rules, cube.structure(), address);
  return check_cell(cube, rules, cube.structure().linear_index(address), applicable);
}

std::vector<DecompositionReport> model_audit(const Cube& cube, const RuleSet& rules) {
  const auto& s = cube.structure();
  std::vector<DecompositionReport> out;
  std::vector<std::size_t> applicable;
  for (std::size_t i = 0; i < cube.size(); ++i) {
    applicable.clear();
    for (std::size_t r = 0; r < rules.size(); ++r) {
      if (rules[r].enabled() && rules[r].covers(s, i)) applicable.push_back(r);
    }
    if (applicable.size() < 2) continue;
    auto report = check_cell(cube, rules, i, applicable);
    if (!report.consistent()) out.push_back(std::move(report));
  }
  return out;
}

}  // namespace pivotmodel
