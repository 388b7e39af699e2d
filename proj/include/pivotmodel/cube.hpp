#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pivotmodel/cell_value.hpp"
#include "pivotmodel/structure.hpp"

namespace pivotmodel {

// Dense value store over the full cartesian product of a structure, with a
// provenance slot per cell. EMPTY cells hold Number(0), so rule evaluation can
// read the value array directly.
class Cube {
 public:
  explicit Cube(std::shared_ptr<const ModelStructure> structure);

  const ModelStructure& structure() const noexcept { return *structure_; }
  const std::shared_ptr<const ModelStructure>& structure_ptr() const noexcept { return structure_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const CellValue> values() const noexcept { return values_; }
  std::span<const Provenance> provenance() const noexcept { return provenance_; }

  CellValue value(std::size_t linear) const { return values_.at(linear); }
  CellValue value(const CellAddress& address) const { return values_[structure_->linear_index(address)]; }
  Provenance provenance(std::size_t linear) const { return provenance_.at(linear); }

  void store(std::size_t linear, CellValue v, Provenance p) {
    values_[linear] = v;
    provenance_[linear] = p;
  }
  void clear(std::size_t linear) { store(linear, CellValue{}, Provenance{}); }

  // Source ids ("erp-2024q1", "user:alice") are interned; provenance refers to
  // them by index.
  std::uint32_t intern_source(std::string_view source);
  const std::string& source_name(std::uint32_t ref) const { return sources_.at(ref); }

  // Names of the rules by sequence as of the last calculation, so RULE
  // provenance stays readable after the rule set changes.
  void set_rule_names(std::vector<std::string> names) { rule_names_ = std::move(names); }
  const std::string& rule_name(std::uint32_t sequence) const { return rule_names_.at(sequence - 1); }

  // "DATA(erp)", "RULE(6, ACCTS - Net sales)", "OVERRIDE(user)", "EMPTY".
  std::string describe_provenance(std::size_t linear) const;

 private:
  std::shared_ptr<const ModelStructure> structure_;
  std::vector<CellValue> values_;
  std::vector<Provenance> provenance_;
  std::vector<std::string> sources_;
  std::unordered_map<std::string, std::uint32_t> source_index_;
  std::vector<std::string> rule_names_;
};

}  // namespace pivotmodel
