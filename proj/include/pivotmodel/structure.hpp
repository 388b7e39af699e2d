#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pivotmodel {

// Unvalidated model structure, as read from a model file.
struct MemberSpec {
  std::string name;
  std::vector<std::string> aliases;
  std::string parent;  // empty = top-level
  std::string format;  // display hint for clients, opaque to the engine
};

struct DimensionSpec {
  std::string name;
  std::vector<MemberSpec> members;
};

struct StructureSpec {
  std::string name;
  std::vector<DimensionSpec> dimensions;
};

struct Member {
  std::string name;
  std::vector<std::string> aliases;
  std::optional<std::size_t> parent;
  std::string format;
};

// Case-folded key used for every name lookup in the model.
std::string fold_case(std::string_view s);

class Dimension {
 public:
  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return members_.size(); }
  const Member& member(std::size_t ordinal) const { return members_.at(ordinal); }
  std::span<const Member> members() const noexcept { return members_; }

  // Resolves a canonical name or alias, ignoring case.
  std::optional<std::size_t> find(std::string_view name) const;
  // As find(), but throws not_found naming this dimension.
  std::size_t ordinal_of(std::string_view name) const;

  // Direct children in member order.
  std::span<const std::size_t> children(std::size_t ordinal) const { return children_.at(ordinal); }
  // Transitive closure below `ordinal`, in member order.
  std::vector<std::size_t> descendants(std::size_t ordinal) const;
  bool is_leaf_in_hierarchy(std::size_t ordinal) const { return children_.at(ordinal).empty(); }
  std::vector<std::size_t> roots() const;
  bool has_hierarchy() const noexcept;

 private:
  friend class ModelStructure;

  std::string name_;
  std::vector<Member> members_;
  std::vector<std::vector<std::size_t>> children_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

// One member ordinal per dimension, in dimension order.
struct CellAddress {
  std::vector<std::size_t> ordinals;

  friend bool operator==(const CellAddress&, const CellAddress&) = default;
};

using NamedAddress = std::vector<std::pair<std::string, std::string>>;

// Immutable after build(); safe to share across threads.
class ModelStructure {
 public:
  // Validates names, aliases, parents and hierarchy acyclicity.
  static ModelStructure build(const StructureSpec& spec);

  const std::string& name() const noexcept { return name_; }
  std::size_t dimension_count() const noexcept { return dimensions_.size(); }
  const Dimension& dimension(std::size_t index) const { return dimensions_.at(index); }
  std::span<const Dimension> dimensions() const noexcept { return dimensions_; }

  std::optional<std::size_t> find_dimension(std::string_view name) const;
  std::size_t dimension_index(std::string_view name) const;

  std::size_t total_cells() const noexcept { return total_cells_; }
  // Row-major: the last dimension varies fastest, so linear order is
  // lexicographic in dimension order.
  std::span<const std::size_t> strides() const noexcept { return strides_; }

  std::size_t linear_index(const CellAddress& address) const;
  CellAddress address_of(std::size_t linear) const;
  std::size_t coordinate(std::size_t linear, std::size_t dim) const noexcept {
    return (linear / strides_[dim]) % dimensions_[dim].size();
  }

  // Every dimension must be named exactly once; members resolve via aliases.
  CellAddress resolve(const NamedAddress& named) const;
  std::vector<std::string> member_names(const CellAddress& address) const;
  std::string describe(const CellAddress& address) const;

  StructureSpec to_spec() const;

 private:
  std::string name_;
  std::vector<Dimension> dimensions_;
  std::vector<std::size_t> strides_;
  std::size_t total_cells_ = 0;
};

// Parses "ACCTS=Net sales,TIME=Qtr1,...". Double quotes protect commas.
NamedAddress parse_named_address(std::string_view text);

}  // namespace pivotmodel
