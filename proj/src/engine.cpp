#include "pivotmodel/engine.hpp"

#include <chrono>

#include "pivotmodel/error.hpp"

namespace pivotmodel {

namespace {

// Odometer over the allowed members of every non-anchor dimension.
template <class Visit>
void for_each_in_scope(const BoundRule& rule, const ModelStructure& s, Visit&& visit) {
  const auto n = s.dimension_count();
  auto strides = s.strides();
  std::vector<std::vector<std::size_t>> allowed(n);
  for (std::size_t d = 0; d < n; ++d) {
    if (d == rule.anchor) {
      allowed[d] = {rule.target};
    } else if (rule.filters[d]) {
      for (std::size_t m = 0; m < s.dimension(d).size(); ++m) {
        if ((*rule.filters[d])[m]) allowed[d].push_back(m);
      }
    } else {
      allowed[d].resize(s.dimension(d).size());
      for (std::size_t m = 0; m < allowed[d].size(); ++m) allowed[d][m] = m;
    }
    if (allowed[d].empty()) return;
  }
  std::vector<std::size_t> pos(n, 0);
  std::size_t linear = 0;
  for (std::size_t d = 0; d < n; ++d) linear += allowed[d][0] * strides[d];
  for (;;) {
    visit(linear);
    std::size_t d = n;
    while (d-- > 0) {
      linear -= allowed[d][pos[d]] * strides[d];
      if (++pos[d] < allowed[d].size()) {
        linear += allowed[d][pos[d]] * strides[d];
        break;
      }
      pos[d] = 0;
      linear += allowed[d][0] * strides[d];
      if (d == 0) return;
    }
  }
}

// Operand addressing specialised for one rule: the anchor pin is a constant
// offset because every scope cell sits on the target member.
struct CompiledRef {
  std::ptrdiff_t anchor_delta = 0;
  std::vector<Pin> other_pins;
};

std::vector<CompiledRef> compile_refs(const BoundRule& rule, const ModelStructure& s) {
  auto strides = s.strides();
  std::vector<CompiledRef> out;
  for (const auto& ref : rule.formula.refs) {
    CompiledRef c;
    for (const auto& pin : ref.pins) {
      if (pin.dimension == rule.anchor) {
        c.anchor_delta = (static_cast<std::ptrdiff_t>(pin.member) - static_cast<std::ptrdiff_t>(rule.target)) *
                         static_cast<std::ptrdiff_t>(strides[pin.dimension]);
      } else {
        c.other_pins.push_back(pin);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::vector<std::size_t> scope_indices(const BoundRule& rule, const ModelStructure& structure) {
  std::vector<std::size_t> out;
  out.reserve(scope_size(rule, structure));
  for_each_in_scope(rule, structure, [&](std::size_t linear) { out.push_back(linear); });
  return out;
}

std::vector<CellAddress> rule_scope(const BoundRule& rule, const ModelStructure& structure) {
  std::vector<CellAddress> out;
  for_each_in_scope(rule, structure, [&](std::size_t linear) { out.push_back(structure.address_of(linear)); });
  return out;
}

std::size_t scope_size(const BoundRule& rule, const ModelStructure& structure) noexcept {
  std::size_t n = 1;
  for (std::size_t d = 0; d < structure.dimension_count(); ++d) {
    if (d == rule.anchor) continue;
    if (rule.filters[d]) {
      std::size_t k = 0;
      for (bool b : *rule.filters[d]) k += b ? 1 : 0;
      n *= k;
    } else {
      n *= structure.dimension(d).size();
    }
  }
  return n;
}

CalcReport apply_rules(Cube& cube, const RuleSet& rules) {
  auto start = std::chrono::steady_clock::now();
  const auto& s = cube.structure();
  auto strides = s.strides();
  CalcReport report;

  for (std::size_t i = 0; i < cube.size(); ++i) {
    if (cube.provenance(i).kind == ProvenanceKind::rule) cube.clear(i);
  }

  std::vector<std::string> names;
  for (const auto& r : rules.rules()) names.push_back(r.name());
  cube.set_rule_names(std::move(names));

  std::vector<std::uint8_t> written(cube.size(), 0);
  std::vector<std::size_t> scope;
  std::vector<CellValue> staged;

  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& rule = rules[i];
    if (!rule.enabled()) continue;
    auto refs = compile_refs(rule, s);
    auto snapshot = cube.values();
    auto provenance = cube.provenance();

    scope.clear();
    staged.clear();
    for_each_in_scope(rule, s, [&](std::size_t base) {
      if (provenance[base].kind == ProvenanceKind::override_pin) {
        ++report.skipped_pinned;
        return;
      }
      scope.push_back(base);
      staged.push_back(evaluate(rule.formula.root, [&](std::size_t r) {
        const auto& ref = refs[r];
        auto linear = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(base) + ref.anchor_delta);
        for (const auto& pin : ref.other_pins) {
          auto current = s.coordinate(base, pin.dimension);
          linear = linear - current * strides[pin.dimension] + pin.member * strides[pin.dimension];
        }
        return snapshot[linear];
      }));
    });

    // Commit only after the whole scope is evaluated: reads above all see the
    // cube as of the rule's start.
    Provenance p{ProvenanceKind::rule, static_cast<std::uint32_t>(i + 1)};
    for (std::size_t k = 0; k < scope.size(); ++k) {
      auto linear = scope[k];
      cube.store(linear, staged[k], p);
      if (written[linear] > 0) {
        ++report.overwrites;
        if (written[linear] == 1) ++report.contested_cells;
      }
      if (written[linear] < 255) ++written[linear];
    }
    report.rules.push_back({i + 1, rule.name(), scope.size()});
    report.cells_written += scope.size();
  }

  report.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

CalcReport write_back(Cube& cube, const RuleSet& rules, std::span<const CellWrite> cells, std::string_view source) {
  const auto& s = cube.structure();
  auto leaves = rules.leaf_mask(s);
  std::vector<std::size_t> targets;
  for (const auto& cell : cells) {
    auto linear = s.linear_index(cell.address);
    if (!is_input_eligible(leaves, cell.address)) {
      throw Error(ErrorCode::validation, "rule-covered cell; use override: " + s.describe(cell.address));
    }
    if (!std::isfinite(cell.value)) {
      throw Error(ErrorCode::validation, "non-finite value for " + s.describe(cell.address));
    }
    targets.push_back(linear);
  }
  Provenance p{ProvenanceKind::data, cube.intern_source(source)};
  for (std::size_t k = 0; k < targets.size(); ++k) {
    cube.store(targets[k], CellValue::number(cells[k].value), p);
  }
  return apply_rules(cube, rules);
}

void override_cell(Cube& cube, const RuleSet& rules, const OverridePin& pin) {
  const auto& s = cube.structure();
  auto linear = s.linear_index(pin.address);
  if (!std::isfinite(pin.value)) {
    throw Error(ErrorCode::validation, "non-finite override for " + s.describe(pin.address));
  }
  auto leaves = rules.leaf_mask(s);
  auto kind = is_input_eligible(leaves, pin.address) ? ProvenanceKind::data : ProvenanceKind::override_pin;
  cube.store(linear, CellValue::number(pin.value), {kind, cube.intern_source(pin.source)});
}

bool clear_override(Cube& cube, const CellAddress& address) {
  auto linear = cube.structure().linear_index(address);
  if (cube.provenance(linear).kind != ProvenanceKind::override_pin) return false;
  cube.clear(linear);
  return true;
}

Model::Model(ModelStructure s, RuleSet r)
    : Model(std::make_shared<const ModelStructure>(std::move(s)), std::move(r)) {}

Model::Model(std::shared_ptr<const ModelStructure> s, RuleSet r)
    : structure(std::move(s)), rules(std::move(r)), cube(structure) {}

}  // namespace pivotmodel
