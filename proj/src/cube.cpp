#include "pivotmodel/cube.hpp"

namespace pivotmodel {

Cube::Cube(std::shared_ptr<const ModelStructure> structure)
    : structure_(std::move(structure)),
      values_(structure_->total_cells()),
      provenance_(structure_->total_cells()) {}

std::uint32_t Cube::intern_source(std::string_view source) {
  auto [it, inserted] = source_index_.try_emplace(std::string(source), static_cast<std::uint32_t>(sources_.size()));
  if (inserted) sources_.emplace_back(source);
  return it->second;
}

std::string Cube::describe_provenance(std::size_t linear) const {
  auto p = provenance_.at(linear);
  std::string kind(to_string(p.kind));
  switch (p.kind) {
    case ProvenanceKind::empty:
      return kind;
    case ProvenanceKind::data:
    case ProvenanceKind::override_pin:
      return kind + "(" + sources_.at(p.ref) + ")";
    case ProvenanceKind::rule:
      return kind + "(" + std::to_string(p.ref) + ", " + rule_name(p.ref) + ")";
  }
  return kind;
}

}  // namespace pivotmodel
