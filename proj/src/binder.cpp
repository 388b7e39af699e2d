#include "pivotmodel/binder.hpp"

#include <algorithm>

#include "pivotmodel/error.hpp"

namespace pivotmodel {

namespace detail {

double round_half_away(double v, double digits) noexcept {
  double scale = std::pow(10.0, std::trunc(digits));
  return std::round(v * scale) / scale;
}

}  // namespace detail

namespace {

void check_arity(Function f, std::size_t n) {
  auto name = std::string(function_name(f));
  auto require = [&](bool ok, const char* what) {
    if (!ok) {
      throw Error(ErrorCode::bind, name + " expects " + what + " argument(s), got " + std::to_string(n));
    }
  };
  switch (f) {
    case Function::iferror:
    case Function::round:
      require(n == 2, "2");
      break;
    case Function::abs:
      require(n == 1, "1");
      break;
    case Function::sum:
    case Function::average:
    case Function::min:
    case Function::max:
      require(n >= 1, "at least 1");
      break;
  }
}

class Binder {
 public:
  Binder(const ModelStructure& s, std::size_t anchor, BoundFormula& out)
      : structure_(s), anchor_(anchor), out_(out) {}

  BoundExpression bind(const Expression& e) {
    BoundExpression b;
    b.kind = e.kind;
    switch (e.kind) {
      case Expression::Kind::number:
        b.number = e.number;
        break;
      case Expression::Kind::member_ref:
        b.ref = out_.refs.size();
        out_.refs.push_back(bind_ref(e));
        break;
      case Expression::Kind::call: {
        auto f = find_function(e.name);
        if (!f) throw Error(ErrorCode::bind, "unknown function '" + e.name + "'");
        check_arity(*f, e.operands.size());
        b.function = *f;
        break;
      }
      case Expression::Kind::binary:
        b.op = e.op;
        break;
      case Expression::Kind::negate:
        break;
    }
    for (const auto& child : e.operands) b.operands.push_back(bind(child));
    return b;
  }

 private:
  BoundRef bind_ref(const Expression& e) {
    const auto& anchor_dim = structure_.dimension(anchor_);
    auto member = anchor_dim.find(e.name);
    if (!member) {
      throw Error(ErrorCode::bind, "unknown member '" + e.name + "' in " + anchor_dim.name());
    }
    BoundRef ref;
    ref.text = to_string(e);
    ref.pins.push_back({anchor_, *member});
    std::vector<bool> overridden(structure_.dimension_count(), false);
    for (const auto& o : e.overrides) {
      auto d = structure_.find_dimension(o.dimension);
      if (!d) {
        throw Error(ErrorCode::bind, "override names unknown dimension '" + o.dimension + "' in " + ref.text);
      }
      if (overridden[*d]) {
        throw Error(ErrorCode::bind, "dimension " + structure_.dimension(*d).name() +
                                         " overridden twice in " + ref.text);
      }
      overridden[*d] = true;
      auto m = structure_.dimension(*d).find(o.member);
      if (!m) {
        throw Error(ErrorCode::bind, "unknown member '" + o.member + "' in " +
                                         structure_.dimension(*d).name() + " (in " + ref.text + ")");
      }
      auto existing = std::find_if(ref.pins.begin(), ref.pins.end(), [&](const Pin& p) { return p.dimension == *d; });
      if (existing != ref.pins.end()) {
        existing->member = *m;
      } else {
        ref.pins.push_back({*d, *m});
      }
    }
    std::sort(ref.pins.begin(), ref.pins.end(), [](const Pin& a, const Pin& b) { return a.dimension < b.dimension; });
    return ref;
  }

  const ModelStructure& structure_;
  std::size_t anchor_;
  BoundFormula& out_;
};

}  // namespace

BoundFormula bind(const Expression& expression, const ModelStructure& structure, std::size_t anchor) {
  if (anchor >= structure.dimension_count()) {
    throw Error(ErrorCode::bind, "anchor dimension out of range");
  }
  BoundFormula f;
  f.source = expression;
  f.anchor = anchor;
  f.root = Binder(structure, anchor, f).bind(expression);
  return f;
}

}  // namespace pivotmodel
