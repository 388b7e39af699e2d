#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pivotmodel/cell_value.hpp"
#include "pivotmodel/expression.hpp"
#include "pivotmodel/structure.hpp"

namespace pivotmodel {

struct Pin {
  std::size_t dimension;
  std::size_t member;

  friend bool operator==(const Pin&, const Pin&) = default;
};

// A resolved member reference: the operand cell is the base cell with each
// pinned dimension replaced. The anchor pin and any overrides are merged, one
// pin per dimension, sorted by dimension.
struct BoundRef {
  std::vector<Pin> pins;
  std::string text;  // the reference as written, e.g. "{Sales | PRODUCT=Total Products}"

  // Linear index of the operand cell for `base`.
  std::size_t target(const ModelStructure& s, std::size_t base) const noexcept {
    auto strides = s.strides();
    std::size_t linear = base;
    for (const auto& pin : pins) {
      auto current = s.coordinate(base, pin.dimension);
      linear = linear - current * strides[pin.dimension] + pin.member * strides[pin.dimension];
    }
    return linear;
  }
};

struct BoundExpression {
  Expression::Kind kind = Expression::Kind::number;
  double number = 0.0;
  std::size_t ref = 0;  // index into BoundFormula::refs
  Function function = Function::sum;
  BinaryOp op = BinaryOp::add;
  std::vector<BoundExpression> operands;
};

struct BoundFormula {
  Expression source;
  std::size_t anchor = 0;
  BoundExpression root;
  std::vector<BoundRef> refs;  // left-to-right order of appearance
};

// Resolves every member reference: unqualified names bind in `anchor`
// (canonical names first, then aliases); overrides name a dimension and a
// member of it and may re-pin the anchor itself. Arity is checked here.
BoundFormula bind(const Expression& expression, const ModelStructure& structure, std::size_t anchor);

namespace detail {

inline CellValue apply_binary(BinaryOp op, double a, double b) noexcept {
  switch (op) {
    case BinaryOp::add: return CellValue::number(a + b);
    case BinaryOp::subtract: return CellValue::number(a - b);
    case BinaryOp::multiply: return CellValue::number(a * b);
    case BinaryOp::divide:
      if (b == 0.0) return CellValue::error(ErrorKind::div0);
      return CellValue::number(a / b);
  }
  return CellValue::error(ErrorKind::fn);
}

double round_half_away(double v, double digits) noexcept;

}  // namespace detail

// Evaluates with operand values supplied by `read(ref_index)`. Never throws:
// failures are Error values, the first error in left-to-right order wins, and
// IFERROR is the only way to stop one.
template <class ReadRef>
CellValue evaluate(const BoundExpression& e, ReadRef&& read) {
  using Kind = Expression::Kind;
  switch (e.kind) {
    case Kind::number:
      return CellValue::number(e.number);
    case Kind::member_ref:
      return read(e.ref);
    case Kind::negate: {
      auto v = evaluate(e.operands[0], read);
      return v.is_error() ? v : CellValue::number(-v.number());
    }
    case Kind::binary: {
      auto lhs = evaluate(e.operands[0], read);
      if (lhs.is_error()) return lhs;
      auto rhs = evaluate(e.operands[1], read);
      if (rhs.is_error()) return rhs;
      return detail::apply_binary(e.op, lhs.number(), rhs.number());
    }
    case Kind::call:
      break;
  }
  switch (e.function) {
    case Function::iferror: {
      auto v = evaluate(e.operands[0], read);
      return v.is_error() ? evaluate(e.operands[1], read) : v;
    }
    case Function::abs: {
      auto v = evaluate(e.operands[0], read);
      return v.is_error() ? v : CellValue::number(std::fabs(v.number()));
    }
    case Function::round: {
      auto v = evaluate(e.operands[0], read);
      if (v.is_error()) return v;
      auto digits = evaluate(e.operands[1], read);
      if (digits.is_error()) return digits;
      return CellValue::number(detail::round_half_away(v.number(), digits.number()));
    }
    case Function::sum:
    case Function::average:
    case Function::min:
    case Function::max: {
      double acc = 0.0;
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        auto v = evaluate(e.operands[i], read);
        if (v.is_error()) return v;
        double x = v.number();
        if (e.function == Function::min) {
          acc = i == 0 ? x : std::fmin(acc, x);
        } else if (e.function == Function::max) {
          acc = i == 0 ? x : std::fmax(acc, x);
        } else {
          acc += x;
        }
      }
      if (e.function == Function::average) acc /= static_cast<double>(e.operands.size());
      return CellValue::number(acc);
    }
  }
  return CellValue::error(ErrorKind::fn);
}

// The cell being computed plus the snapshot it reads from.
struct EvalContext {
  const ModelStructure& structure;
  std::span<const CellValue> snapshot;
  std::size_t base;
};

inline CellValue evaluate(const BoundFormula& f, const EvalContext& ctx) {
  return evaluate(f.root, [&](std::size_t ref) {
    return ctx.snapshot[f.refs[ref].target(ctx.structure, ctx.base)];
  });
}

}  // namespace pivotmodel
