#include "pivotmodel/rule_set.hpp"

#include <algorithm>

#include "pivotmodel/error.hpp"

namespace pivotmodel {

bool BoundRule::covers(const ModelStructure& s, std::size_t linear) const noexcept {
  if (s.coordinate(linear, anchor) != target) return false;
  for (std::size_t d = 0; d < filters.size(); ++d) {
    if (filters[d] && !(*filters[d])[s.coordinate(linear, d)]) return false;
  }
  return true;
}

bool BoundRule::covers(const CellAddress& address) const noexcept {
  if (address.ordinals[anchor] != target) return false;
  for (std::size_t d = 0; d < filters.size(); ++d) {
    if (filters[d] && !(*filters[d])[address.ordinals[d]]) return false;
  }
  return true;
}

BoundRule bind_rule(const RuleSpec& spec, const ModelStructure& structure) {
  try {
    BoundRule rule;
    rule.spec = spec;
    auto anchor = structure.find_dimension(spec.dimension);
    if (!anchor) throw Error(ErrorCode::bind, "unknown dimension '" + spec.dimension + "'");
    rule.anchor = *anchor;
    const auto& dim = structure.dimension(rule.anchor);
    auto target = dim.find(spec.target);
    if (!target) throw Error(ErrorCode::bind, "unknown target member '" + spec.target + "' in " + dim.name());
    rule.target = *target;
    rule.formula = bind(parse_formula(spec.formula), structure, rule.anchor);
    rule.filters.assign(structure.dimension_count(), std::nullopt);
    for (const auto& [fdim, members] : spec.filters) {
      auto d = structure.find_dimension(fdim);
      if (!d) throw Error(ErrorCode::bind, "filter names unknown dimension '" + fdim + "'");
      if (*d == rule.anchor) {
        throw Error(ErrorCode::validation, "filter on the anchor dimension " + dim.name());
      }
      if (rule.filters[*d]) {
        throw Error(ErrorCode::validation, "dimension " + fdim + " filtered twice");
      }
      if (members.empty()) throw Error(ErrorCode::validation, "filter on " + fdim + " lists no members");
      const auto& fd = structure.dimension(*d);
      std::vector<bool> mask(fd.size(), false);
      for (const auto& m : members) {
        auto ordinal = fd.find(m);
        if (!ordinal) throw Error(ErrorCode::bind, "filter names unknown member '" + m + "' in " + fd.name());
        mask[*ordinal] = true;
      }
      rule.filters[*d] = std::move(mask);
    }
    return rule;
  } catch (const Error& e) {
    throw Error(e.code(), "rule '" + spec.name + "': " + e.what(), e.detail());
  }
}

RuleSet RuleSet::bind(std::span<const RuleSpec> specs, const ModelStructure& structure) {
  RuleSet set;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      set.rules_.push_back(bind_rule(specs[i], structure));
    } catch (const Error& e) {
      throw Error(e.code(), "rule " + std::to_string(i + 1) + " " + e.what(), e.detail());
    }
  }
  return set;
}

std::size_t RuleSet::enabled_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(rules_.begin(), rules_.end(), [](const BoundRule& r) { return r.enabled(); }));
}

std::size_t RuleSet::index_of(std::string_view name) const {
  auto key = fold_case(name);
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (fold_case(rules_[i].name()) != key) continue;
    if (found) throw Error(ErrorCode::validation, "rule name '" + std::string(name) + "' is ambiguous");
    found = i;
  }
  if (!found) throw Error(ErrorCode::not_found, "unknown rule '" + std::string(name) + "'");
  return *found;
}

RuleSet RuleSet::reordered(std::span<const std::size_t> permutation) const {
  if (permutation.size() != rules_.size()) {
    throw Error(ErrorCode::validation, "permutation has " + std::to_string(permutation.size()) +
                                           " entries for " + std::to_string(rules_.size()) + " rules");
  }
  std::vector<bool> used(rules_.size(), false);
  RuleSet out;
  for (auto old : permutation) {
    if (old >= rules_.size() || used[old]) throw Error(ErrorCode::validation, "invalid permutation");
    used[old] = true;
    out.rules_.push_back(rules_[old]);
  }
  return out;
}

RuleSet RuleSet::with_enabled(std::size_t index, bool enabled) const {
  if (index >= rules_.size()) throw Error(ErrorCode::not_found, "rule index out of range");
  RuleSet out = *this;
  out.rules_[index].spec.enabled = enabled;
  return out;
}

RuleSet RuleSet::with_rule(BoundRule rule) const {
  RuleSet out = *this;
  out.rules_.push_back(std::move(rule));
  return out;
}

std::vector<RuleSpec> RuleSet::specs() const {
  std::vector<RuleSpec> out;
  out.reserve(rules_.size());
  for (const auto& r : rules_) out.push_back(r.spec);
  return out;
}

LeafMask RuleSet::leaf_mask(const ModelStructure& structure) const {
  LeafMask mask;
  for (const auto& dim : structure.dimensions()) mask.emplace_back(dim.size(), true);
  for (const auto& r : rules_) {
    if (r.enabled()) mask[r.anchor][r.target] = false;
  }
  return mask;
}

bool is_input_eligible(const LeafMask& leaves, const CellAddress& address) noexcept {
  for (std::size_t d = 0; d < leaves.size(); ++d) {
    if (!leaves[d][address.ordinals[d]]) return false;
  }
  return true;
}

bool is_input_eligible(const LeafMask& leaves, const ModelStructure& s, std::size_t linear) noexcept {
  for (std::size_t d = 0; d < leaves.size(); ++d) {
    if (!leaves[d][s.coordinate(linear, d)]) return false;
  }
  return true;
}

ModelStats stats(const ModelStructure& structure, const RuleSet& rules) {
  auto mask = rules.leaf_mask(structure);
  ModelStats st;
  st.total_cells = structure.total_cells();
  st.input_cells = 1;
  for (const auto& dim : mask) {
    st.input_cells *= static_cast<std::size_t>(std::count(dim.begin(), dim.end(), true));
  }
  st.calculated_cells = st.total_cells - st.input_cells;
  return st;
}

}  // namespace pivotmodel
