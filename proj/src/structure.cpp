#include "pivotmodel/structure.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "pivotmodel/error.hpp"

namespace pivotmodel {

std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

std::string trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

std::optional<std::size_t> Dimension::find(std::string_view name) const {
  auto it = lookup_.find(fold_case(name));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dimension::ordinal_of(std::string_view name) const {
  if (auto ordinal = find(name)) return *ordinal;
  throw Error(ErrorCode::not_found,
              "unknown member '" + std::string(name) + "' in " + name_);
}

std::vector<std::size_t> Dimension::descendants(std::size_t ordinal) const {
  std::vector<bool> below(members_.size(), false);
  std::vector<std::size_t> stack(children_.at(ordinal).begin(), children_.at(ordinal).end());
  while (!stack.empty()) {
    auto m = stack.back();
    stack.pop_back();
    if (below[m]) continue;
    below[m] = true;
    stack.insert(stack.end(), children_[m].begin(), children_[m].end());
  }
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < below.size(); ++m) {
    if (below[m]) out.push_back(m);
  }
  return out;
}

std::vector<std::size_t> Dimension::roots() const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < members_.size(); ++m) {
    if (!members_[m].parent) out.push_back(m);
  }
  return out;
}

bool Dimension::has_hierarchy() const noexcept {
  return std::any_of(members_.begin(), members_.end(), [](const Member& m) { return m.parent.has_value(); });
}

ModelStructure ModelStructure::build(const StructureSpec& spec) {
  if (spec.dimensions.size() < 2) {
    throw Error(ErrorCode::validation, "a model needs at least two dimensions");
  }
  ModelStructure s;
  s.name_ = spec.name;
  std::unordered_map<std::string, std::size_t> dim_names;
  for (const auto& dspec : spec.dimensions) {
    auto dname = trimmed(dspec.name);
    if (dname.empty()) throw Error(ErrorCode::validation, "dimension name is empty");
    if (!dim_names.emplace(fold_case(dname), s.dimensions_.size()).second) {
      throw Error(ErrorCode::validation, "duplicate dimension '" + dname + "'");
    }
    if (dspec.members.empty()) {
      throw Error(ErrorCode::validation, "dimension " + dname + " has no members");
    }

    Dimension dim;
    dim.name_ = dname;
    for (const auto& mspec : dspec.members) {
      Member m;
      m.name = trimmed(mspec.name);
      m.format = mspec.format;
      if (m.name.empty()) throw Error(ErrorCode::validation, "empty member name in " + dname);
      auto ordinal = dim.members_.size();
      auto add_key = [&](const std::string& key) {
        if (!dim.lookup_.emplace(fold_case(key), ordinal).second) {
          throw Error(ErrorCode::validation,
                      "duplicate member name or alias '" + key + "' in " + dname);
        }
      };
      add_key(m.name);
      for (const auto& alias : mspec.aliases) {
        auto a = trimmed(alias);
        if (a.empty()) throw Error(ErrorCode::validation, "empty alias on " + m.name + " in " + dname);
        add_key(a);
        m.aliases.push_back(a);
      }
      dim.members_.push_back(std::move(m));
    }

    dim.children_.assign(dim.members_.size(), {});
    for (std::size_t i = 0; i < dspec.members.size(); ++i) {
      const auto& parent = dspec.members[i].parent;
      if (trimmed(parent).empty()) continue;
      auto p = dim.find(trimmed(parent));
      if (!p) {
        throw Error(ErrorCode::validation, "unknown parent '" + parent + "' of " +
                                               dim.members_[i].name + " in " + dname);
      }
      dim.members_[i].parent = *p;
    }
    // Walk each parent chain; a chain longer than the member count loops.
    for (std::size_t i = 0; i < dim.members_.size(); ++i) {
      auto cur = dim.members_[i].parent;
      std::size_t steps = 0;
      while (cur) {
        if (++steps > dim.members_.size() || *cur == i) {
          throw Error(ErrorCode::validation,
                      "parent cycle through " + dim.members_[i].name + " in " + dname);
        }
        cur = dim.members_[*cur].parent;
      }
    }
    for (std::size_t i = 0; i < dim.members_.size(); ++i) {
      if (auto p = dim.members_[i].parent) dim.children_[*p].push_back(i);
    }
    s.dimensions_.push_back(std::move(dim));
  }

  s.strides_.assign(s.dimensions_.size(), 1);
  std::size_t total = 1;
  for (std::size_t d = s.dimensions_.size(); d-- > 0;) {
    s.strides_[d] = total;
    auto n = s.dimensions_[d].size();
    if (total > std::numeric_limits<std::size_t>::max() / n) {
      throw Error(ErrorCode::validation, "cell count overflows");
    }
    total *= n;
  }
  s.total_cells_ = total;
  return s;
}

std::optional<std::size_t> ModelStructure::find_dimension(std::string_view name) const {
  auto key = fold_case(trimmed(name));
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    if (fold_case(dimensions_[d].name()) == key) return d;
  }
  return std::nullopt;
}

std::size_t ModelStructure::dimension_index(std::string_view name) const {
  if (auto d = find_dimension(name)) return *d;
  throw Error(ErrorCode::not_found, "unknown dimension '" + std::string(name) + "'");
}

std::size_t ModelStructure::linear_index(const CellAddress& address) const {
  if (address.ordinals.size() != dimensions_.size()) {
    throw Error(ErrorCode::validation, "address has " + std::to_string(address.ordinals.size()) +
                                           " coordinates, model has " +
                                           std::to_string(dimensions_.size()) + " dimensions");
  }
  std::size_t linear = 0;
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    if (address.ordinals[d] >= dimensions_[d].size()) {
      throw Error(ErrorCode::validation, "ordinal " + std::to_string(address.ordinals[d]) +
                                             " out of range for " + dimensions_[d].name());
    }
    linear += address.ordinals[d] * strides_[d];
  }
  return linear;
}

CellAddress ModelStructure::address_of(std::size_t linear) const {
  if (linear >= total_cells_) {
    throw Error(ErrorCode::validation, "linear index " + std::to_string(linear) + " out of range");
  }
  CellAddress a;
  a.ordinals.resize(dimensions_.size());
  for (std::size_t d = 0; d < dimensions_.size(); ++d) a.ordinals[d] = coordinate(linear, d);
  return a;
}

CellAddress ModelStructure::resolve(const NamedAddress& named) const {
  CellAddress a;
  a.ordinals.assign(dimensions_.size(), 0);
  std::vector<bool> seen(dimensions_.size(), false);
  for (const auto& [dim, member] : named) {
    auto d = dimension_index(dim);
    if (seen[d]) throw Error(ErrorCode::validation, "dimension " + dimensions_[d].name() + " named twice");
    seen[d] = true;
    a.ordinals[d] = dimensions_[d].ordinal_of(member);
  }
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    if (!seen[d]) throw Error(ErrorCode::validation, "address is missing dimension " + dimensions_[d].name());
  }
  return a;
}

std::vector<std::string> ModelStructure::member_names(const CellAddress& address) const {
  std::vector<std::string> out;
  out.reserve(dimensions_.size());
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    out.push_back(dimensions_[d].member(address.ordinals.at(d)).name);
  }
  return out;
}

std::string ModelStructure::describe(const CellAddress& address) const {
  std::string out;
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    if (d) out += ", ";
    out += dimensions_[d].name() + "=" + dimensions_[d].member(address.ordinals.at(d)).name;
  }
  return out;
}

StructureSpec ModelStructure::to_spec() const {
  StructureSpec spec;
  spec.name = name_;
  for (const auto& dim : dimensions_) {
    DimensionSpec dspec;
    dspec.name = dim.name();
    for (const auto& m : dim.members()) {
      MemberSpec ms;
      ms.name = m.name;
      ms.aliases = m.aliases;
      ms.format = m.format;
      if (m.parent) ms.parent = dim.member(*m.parent).name;
      dspec.members.push_back(std::move(ms));
    }
    spec.dimensions.push_back(std::move(dspec));
  }
  return spec;
}

NamedAddress parse_named_address(std::string_view text) {
  std::vector<std::string> parts(1);
  bool quoted = false;
  for (char c : text) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      parts.emplace_back();
    } else {
      parts.back().push_back(c);
    }
  }
  if (quoted) throw Error(ErrorCode::parse, "unterminated quote in cell address");
  NamedAddress out;
  for (const auto& part : parts) {
    auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::parse, "expected DIM=Member in cell address, got '" + part + "'");
    }
    out.emplace_back(trimmed(part.substr(0, eq)), trimmed(part.substr(eq + 1)));
  }
  return out;
}

}  // namespace pivotmodel
