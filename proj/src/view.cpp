#include "pivotmodel/view.hpp"

#include "pivotmodel/csv.hpp"
#include "pivotmodel/error.hpp"

namespace pivotmodel {

std::string_view to_string(CellFlag flag) noexcept {
  switch (flag) {
    case CellFlag::input: return "input";
    case CellFlag::rule: return "rule";
    case CellFlag::override_pin: return "override";
    case CellFlag::error: return "error";
  }
  return "input";
}

namespace {

const std::vector<std::string>* lookup(const std::map<std::string, std::vector<std::string>>& m,
                                       const ModelStructure& s, std::size_t dim) {
  for (const auto& [name, members] : m) {
    if (s.dimension_index(name) == dim) return &members;
  }
  return nullptr;
}

struct Axis {
  std::vector<std::size_t> dims;
  std::vector<std::vector<std::size_t>> tuples;  // member ordinals per dim
  std::vector<std::size_t> offsets;              // linear contribution of each tuple
};

Axis build_axis(const ModelStructure& s, const std::vector<std::size_t>& dims, const ViewSpec& spec) {
  Axis axis;
  axis.dims = dims;
  axis.tuples.push_back({});
  axis.offsets.push_back(0);
  for (auto d : dims) {
    auto members = visible_members(s, d, spec);
    std::vector<std::vector<std::size_t>> tuples;
    std::vector<std::size_t> offsets;
    for (std::size_t t = 0; t < axis.tuples.size(); ++t) {
      for (auto m : members) {
        auto tuple = axis.tuples[t];
        tuple.push_back(m);
        tuples.push_back(std::move(tuple));
        offsets.push_back(axis.offsets[t] + m * s.strides()[d]);
      }
    }
    axis.tuples = std::move(tuples);
    axis.offsets = std::move(offsets);
  }
  return axis;
}

}  // namespace

std::vector<std::size_t> visible_members(const ModelStructure& s, std::size_t dim, const ViewSpec& spec) {
  const auto& dimension = s.dimension(dim);
  if (const auto* selection = lookup(spec.member_selection, s, dim)) {
    if (selection->empty()) throw Error(ErrorCode::validation, "member_selection for " + dimension.name() + " is empty");
    std::vector<std::size_t> out;
    for (const auto& name : *selection) out.push_back(dimension.ordinal_of(name));
    return out;
  }
  const auto* expanded = lookup(spec.expand, s, dim);
  if (!expanded) {
    std::vector<std::size_t> out(dimension.size());
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = m;
    return out;
  }
  std::vector<bool> open(dimension.size(), false);
  for (const auto& name : *expanded) {
    auto m = dimension.ordinal_of(name);
    if (dimension.is_leaf_in_hierarchy(m)) {
      throw Error(ErrorCode::validation, "cannot expand " + dimension.member(m).name + " in " + dimension.name() +
                                             ": it has no children");
    }
    open[m] = true;
  }
  std::vector<bool> visible(dimension.size(), false);
  for (std::size_t m = 0; m < dimension.size(); ++m) {
    bool shown = true;
    for (auto p = dimension.member(m).parent; p && shown; p = dimension.member(*p).parent) shown = open[*p];
    visible[m] = shown;
  }
  for (std::size_t m = 0; m < dimension.size(); ++m) {
    if (open[m] && !visible[m]) {
      throw Error(ErrorCode::validation, "cannot expand " + dimension.member(m).name + " in " + dimension.name() +
                                             ": an ancestor is collapsed");
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < dimension.size(); ++m) {
    if (visible[m]) out.push_back(m);
  }
  return out;
}

ViewGrid materialize_view(const Cube& cube, const RuleSet& rules, const ViewSpec& spec, std::uint64_t model_version) {
  const auto& s = cube.structure();
  std::vector<int> placed(s.dimension_count(), 0);
  std::size_t page_offset = 0;
  auto place = [&](const std::string& name) {
    auto d = s.find_dimension(name);
    if (!d) throw Error(ErrorCode::validation, "view names unknown dimension '" + name + "'");
    if (placed[*d]++) throw Error(ErrorCode::validation, "dimension " + s.dimension(*d).name() + " placed twice");
    return *d;
  };
  for (const auto& [dim, member] : spec.pages) {
    auto d = place(dim);
    auto m = s.dimension(d).find(member);
    if (!m) throw Error(ErrorCode::validation, "unknown member '" + member + "' in " + s.dimension(d).name());
    page_offset += *m * s.strides()[d];
  }
  std::vector<std::size_t> row_dims, col_dims;
  for (const auto& name : spec.rows) row_dims.push_back(place(name));
  for (const auto& name : spec.cols) col_dims.push_back(place(name));
  for (std::size_t d = 0; d < placed.size(); ++d) {
    if (!placed[d]) throw Error(ErrorCode::validation, "dimension " + s.dimension(d).name() + " is not placed in the view");
  }

  auto rows = build_axis(s, row_dims, spec);
  auto cols = build_axis(s, col_dims, spec);
  auto leaves = rules.leaf_mask(s);

  ViewGrid grid;
  grid.model_version = model_version;
  auto headers = [&](const Axis& axis, std::vector<std::string>& dim_names, std::vector<std::vector<std::string>>& out) {
    for (auto d : axis.dims) dim_names.push_back(s.dimension(d).name());
    for (const auto& tuple : axis.tuples) {
      std::vector<std::string> names;
      for (std::size_t k = 0; k < tuple.size(); ++k) names.push_back(s.dimension(axis.dims[k]).member(tuple[k]).name);
      out.push_back(std::move(names));
    }
  };
  headers(rows, grid.row_dimensions, grid.row_headers);
  headers(cols, grid.col_dimensions, grid.col_headers);

  // Input eligibility per axis tuple and page, so each cell is a conjunction.
  auto tuple_leaf = [&](const Axis& axis) {
    std::vector<bool> out;
    for (const auto& tuple : axis.tuples) {
      bool leaf = true;
      for (std::size_t k = 0; k < tuple.size(); ++k) leaf = leaf && leaves[axis.dims[k]][tuple[k]];
      out.push_back(leaf);
    }
    return out;
  };
  auto row_leaf = tuple_leaf(rows);
  auto col_leaf = tuple_leaf(cols);
  bool page_leaf = true;
  for (const auto& [dim, member] : spec.pages) {
    auto d = s.dimension_index(dim);
    page_leaf = page_leaf && leaves[d][*s.dimension(d).find(member)];
  }

  grid.values.reserve(rows.tuples.size() * cols.tuples.size());
  grid.flags.reserve(grid.values.capacity());
  for (std::size_t r = 0; r < rows.tuples.size(); ++r) {
    for (std::size_t c = 0; c < cols.tuples.size(); ++c) {
      auto linear = page_offset + rows.offsets[r] + cols.offsets[c];
      auto v = cube.value(linear);
      grid.values.push_back(v);
      CellFlag flag;
      if (v.is_error()) {
        flag = CellFlag::error;
      } else if (cube.provenance(linear).kind == ProvenanceKind::override_pin) {
        flag = CellFlag::override_pin;
      } else if (page_leaf && row_leaf[r] && col_leaf[c]) {
        flag = CellFlag::input;
      } else {
        flag = CellFlag::rule;
      }
      grid.flags.push_back(flag);
    }
  }
  return grid;
}

std::string view_to_csv(const ViewGrid& grid) {
  CsvWriter w;
  for (const auto& d : grid.row_dimensions) w.field(d);
  for (const auto& tuple : grid.col_headers) {
    std::string label;
    for (const auto& name : tuple) label += (label.empty() ? "" : " / ") + name;
    w.field(label);
  }
  w.end_row();
  for (std::size_t r = 0; r < grid.row_count(); ++r) {
    for (const auto& name : grid.row_headers[r]) w.field(name);
    for (std::size_t c = 0; c < grid.col_count(); ++c) w.field(format_value(grid.at(r, c)));
    w.end_row();
  }
  return w.take();
}

}  // namespace pivotmodel
