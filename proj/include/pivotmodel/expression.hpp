#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pivotmodel {

enum class BinaryOp : char { add = '+', subtract = '-', multiply = '*', divide = '/' };

// SUM and IFERROR are the core set; the rest are conveniences.
enum class Function { sum, iferror, average, min, max, abs, round };

std::optional<Function> find_function(std::string_view name);
std::string_view function_name(Function f) noexcept;

struct MemberOverride {
  std::string dimension;
  std::string member;

  friend bool operator==(const MemberOverride&, const MemberOverride&) = default;
};

// Unbound syntax tree of a rule formula. Member references are names; they
// are resolved against a structure by bind().
struct Expression {
  enum class Kind { number, member_ref, call, binary, negate };

  Kind kind = Kind::number;
  double number = 0.0;                   // number
  std::string name;                      // member_ref: member; call: function (upper case)
  std::vector<MemberOverride> overrides; // member_ref
  BinaryOp op = BinaryOp::add;           // binary
  std::vector<Expression> operands;      // call args, binary (lhs, rhs), negate (child)

  static Expression literal(double v);
  static Expression ref(std::string member, std::vector<MemberOverride> overrides = {});
  static Expression call(std::string function, std::vector<Expression> args);
  static Expression binary(BinaryOp op, Expression lhs, Expression rhs);
  static Expression negate(Expression child);

  friend bool operator==(const Expression&, const Expression&) = default;
};

// Grammar:
//   formula  := ['='] sum
//   sum      := product (('+' | '-') product)*
//   product  := unary (('*' | '/') unary)*
//   unary    := ('-' | '+') unary | primary
//   primary  := NUMBER | '{' NAME ['|' DIM '=' MEMBER (',' DIM '=' MEMBER)*] '}'
//             | IDENT '(' [sum (',' sum)*] ')' | '(' sum ')'
// NAME is any run of characters other than braces and '|', trimmed. Throws
// Error(parse) with the character offset of the problem.
Expression parse_formula(std::string_view text);

// Canonical text: minimal parentheses, " op " spacing, "F(a, b)" calls and
// "{name | DIM=Member}" references. parse_formula(to_string(e)) == e.
std::string to_string(const Expression& e);

// Member references in left-to-right order of appearance.
std::vector<const Expression*> member_refs(const Expression& e);

}  // namespace pivotmodel
