#include <sstream>

#include "pivotmodel/csv.hpp"
#include "pivotmodel/trace.hpp"

namespace pivotmodel {

namespace {

std::string folder_heading(const BoundRule& rule) {
  std::string out;
  for (const auto& part : rule.spec.folder) {
    if (!out.empty()) out += " / ";
    out += part;
  }
  return out;
}

std::string rule_label(const BoundRule& rule, std::size_t sequence) {
  return std::to_string(sequence) + ". " + rule.name() + (rule.enabled() ? "" : " (disabled)");
}

}  // namespace

std::string export_docs_csv(const ModelStructure& structure, const RuleSet& rules) {
  CsvWriter w;
  for (const auto& dim : structure.dimensions()) {
    w.field(dim.name()).end_row();
    w.field("Dimension Members").field("Child").field("Parent").end_row();
    for (std::size_t m = 0; m < dim.size(); ++m) {
      const auto& member = dim.member(m);
      w.field(member.name).field(std::to_string(m + 1));
      w.field(std::to_string(member.parent ? *member.parent + 1 : 0)).end_row();
    }
    w.blank_row();
  }
  w.field("Rules").end_row();
  std::optional<std::string> folder;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    auto heading = folder_heading(rules[i]);
    if (!folder || *folder != heading) {
      w.field(heading).end_row();
      folder = heading;
    }
    w.field(rule_label(rules[i], i + 1)).field("= " + rules[i].display_text()).end_row();
  }
  return w.take();
}

std::string render_docs_text(const ModelStructure& structure, const RuleSet& rules) {
  std::ostringstream out;
  out << structure.name() << "\n\n";
  for (const auto& dim : structure.dimensions()) {
    std::size_t width = 17;
    for (const auto& m : dim.members()) width = std::max(width, m.name.size());
    out << dim.name() << "\n";
    out << "  Dimension Members" << std::string(width - 17, ' ') << "  Child  Parent\n";
    for (std::size_t m = 0; m < dim.size(); ++m) {
      const auto& member = dim.member(m);
      auto child = std::to_string(m + 1);
      auto parent = std::to_string(member.parent ? *member.parent + 1 : 0);
      out << "  " << member.name << std::string(width - member.name.size(), ' ') << "  "
          << std::string(5 - std::min<std::size_t>(5, child.size()), ' ') << child << "  "
          << std::string(6 - std::min<std::size_t>(6, parent.size()), ' ') << parent << "\n";
    }
    out << "\n";
  }
  out << "Rules\n";
  std::optional<std::string> folder;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    auto heading = folder_heading(rules[i]);
    if (!folder || *folder != heading) {
      out << "  " << (heading.empty() ? "(no folder)" : heading) << "\n";
      folder = heading;
    }
    out << "    " << rule_label(rules[i], i + 1) << "  = " << rules[i].display_text() << "\n";
  }
  return out.str();
}

}  // namespace pivotmodel
