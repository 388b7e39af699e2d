#include "pivotmodel/lint.hpp"

namespace pivotmodel {

std::string_view to_string(FindingKind kind) noexcept {
  switch (kind) {
    case FindingKind::uncovered_aggregate: return "uncovered_aggregate";
    case FindingKind::shadowed_rule: return "shadowed_rule";
    case FindingKind::self_reference: return "self_reference";
  }
  return "unknown";
}

namespace {

bool filters_overlap(const BoundRule& a, const BoundRule& b) {
  for (std::size_t d = 0; d < a.filters.size(); ++d) {
    if (!a.filters[d] || !b.filters[d]) continue;
    bool any = false;
    for (std::size_t m = 0; m < a.filters[d]->size() && !any; ++m) {
      any = (*a.filters[d])[m] && (*b.filters[d])[m];
    }
    if (!any) return false;
  }
  return true;
}

}  // namespace

bool is_self_referential(const BoundRule& rule) {
  // An operand differs from its base cell only on pinned dimensions. It lies
  // in scope iff the anchor pin is the target and every other pin passes the
  // rule's filter on that dimension (unpinned coordinates already pass).
  for (const auto& ref : rule.formula.refs) {
    bool inside = true;
    for (const auto& pin : ref.pins) {
      if (pin.dimension == rule.anchor) {
        inside = inside && pin.member == rule.target;
      } else if (rule.filters[pin.dimension]) {
        inside = inside && (*rule.filters[pin.dimension])[pin.member];
      }
    }
    if (inside) return true;
  }
  return false;
}

std::vector<LintFinding> coverage_lint(const ModelStructure& structure, const RuleSet& rules) {
  std::vector<LintFinding> findings;
  auto leaves = rules.leaf_mask(structure);

  for (std::size_t d = 0; d < structure.dimension_count(); ++d) {
    const auto& dim = structure.dimension(d);
    for (std::size_t m = 0; m < dim.size(); ++m) {
      if (dim.is_leaf_in_hierarchy(m) || !leaves[d][m]) continue;
      findings.push_back({FindingKind::uncovered_aggregate,
                          dim.name() + " member '" + dim.member(m).name +
                              "' has hierarchy children but no enabled rule computes it",
                          d, m, {}});
    }
  }

  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& a = rules[i];
    if (!a.enabled()) continue;
    for (std::size_t j = i + 1; j < rules.size(); ++j) {
      const auto& b = rules[j];
      if (!b.enabled() || a.anchor != b.anchor || a.target != b.target || !filters_overlap(a, b)) continue;
      findings.push_back({FindingKind::shadowed_rule,
                          "rule " + std::to_string(i + 1) + " '" + a.name() + "' is shadowed by rule " +
                              std::to_string(j + 1) + " '" + b.name() + "' on overlapping cells",
                          a.anchor, a.target, {i, j}});
    }
  }

  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    if (!r.enabled() || !is_self_referential(r)) continue;
    findings.push_back({FindingKind::self_reference,
                        "rule " + std::to_string(i + 1) + " '" + r.name() +
                            "' reads cells it writes and sees their values from before the rule ran",
                        r.anchor, r.target, {i}});
  }
  return findings;
}

}  // namespace pivotmodel
