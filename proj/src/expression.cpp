#include "pivotmodel/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "pivotmodel/cell_value.hpp"
#include "pivotmodel/error.hpp"

namespace pivotmodel {

namespace {

struct FunctionEntry {
  std::string_view name;
  Function function;
};

constexpr FunctionEntry kFunctions[] = {
    {"SUM", Function::sum},     {"IFERROR", Function::iferror}, {"AVERAGE", Function::average},
    {"MIN", Function::min},     {"MAX", Function::max},         {"ABS", Function::abs},
    {"ROUND", Function::round},
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression parse() {
    skip_space();
    if (peek() == '=') ++pos_;
    skip_space();
    if (at_end()) fail("empty formula");
    auto e = parse_sum();
    skip_space();
    if (!at_end()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::parse, what + " at offset " + std::to_string(pos_), std::string(text_));
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Expression parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      skip_space();
      char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      auto rhs = parse_product();
      lhs = Expression::binary(static_cast<BinaryOp>(c), std::move(lhs), std::move(rhs));
    }
  }

  Expression parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      skip_space();
      char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      auto rhs = parse_unary();
      lhs = Expression::binary(static_cast<BinaryOp>(c), std::move(lhs), std::move(rhs));
    }
  }

  Expression parse_unary() {
    skip_space();
    if (peek() == '-') {
      ++pos_;
      return Expression::negate(parse_unary());
    }
    if (peek() == '+') {
      ++pos_;
      return parse_unary();
    }
    return parse_primary();
  }

  Expression parse_primary() {
    skip_space();
    char c = peek();
    if (at_end()) fail("unexpected end of formula");
    if (c == '(') {
      ++pos_;
      auto e = parse_sum();
      skip_space();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return e;
    }
    if (c == '{') return parse_member_ref();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_call();
    fail(std::string("unexpected '") + c + "'");
  }

  Expression parse_number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || !std::isfinite(v)) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return Expression::literal(v);
  }

  Expression parse_call() {
    auto start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                         text_[pos_] == '.')) {
      ++pos_;
    }
    auto name = upper(text_.substr(start, pos_ - start));
    if (!find_function(name)) {
      pos_ = start;
      fail("unknown function '" + name + "'");
    }
    skip_space();
    if (peek() != '(') fail("expected '(' after " + name);
    ++pos_;
    std::vector<Expression> args;
    skip_space();
    if (peek() == ')') {
      ++pos_;
      return Expression::call(std::move(name), std::move(args));
    }
    for (;;) {
      args.push_back(parse_sum());
      skip_space();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ')') {
        ++pos_;
        break;
      }
      fail("expected ',' or ')' in arguments of " + name);
    }
    return Expression::call(std::move(name), std::move(args));
  }

  Expression parse_member_ref() {
    auto open = pos_++;
    auto close = text_.find('}', pos_);
    auto nested = text_.find('{', pos_);
    if (close == std::string_view::npos || (nested != std::string_view::npos && nested < close)) {
      pos_ = open;
      fail("unterminated member reference");
    }
    auto body = text_.substr(pos_, close - pos_);
    auto bar = body.find('|');
    auto name = trim(body.substr(0, bar));
    if (name.empty()) fail("empty member reference");
    std::vector<MemberOverride> overrides;
    if (bar != std::string_view::npos) {
      auto rest = body.substr(bar + 1);
      if (rest.find('|') != std::string_view::npos) fail("more than one '|' in member reference");
      std::size_t from = 0;
      for (;;) {
        auto comma = rest.find(',', from);
        auto item = rest.substr(from, comma == std::string_view::npos ? rest.npos : comma - from);
        auto eq = item.find('=');
        if (eq == std::string_view::npos) fail("expected DIM=Member in member reference");
        auto dim = trim(item.substr(0, eq));
        auto member = trim(item.substr(eq + 1));
        if (dim.empty() || member.empty()) fail("expected DIM=Member in member reference");
        overrides.push_back({std::string(dim), std::string(member)});
        if (comma == std::string_view::npos) break;
        from = comma + 1;
      }
    }
    pos_ = close + 1;
    return Expression::ref(std::string(name), std::move(overrides));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

int precedence(const Expression& e) {
  switch (e.kind) {
    case Expression::Kind::binary:
      return (e.op == BinaryOp::add || e.op == BinaryOp::subtract) ? 1 : 2;
    case Expression::Kind::negate:
      return 3;
    default:
      return 4;
  }
}

void print(const Expression& e, std::string& out);

void print_operand(const Expression& e, int min_precedence, std::string& out) {
  if (precedence(e) < min_precedence) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expression& e, std::string& out) {
  switch (e.kind) {
    case Expression::Kind::number:
      out += format_number(e.number);
      break;
    case Expression::Kind::member_ref:
      out += '{';
      out += e.name;
      for (std::size_t i = 0; i < e.overrides.size(); ++i) {
        out += i == 0 ? " | " : ", ";
        out += e.overrides[i].dimension + "=" + e.overrides[i].member;
      }
      out += '}';
      break;
    case Expression::Kind::call:
      out += e.name;
      out += '(';
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += ", ";
        print(e.operands[i], out);
      }
      out += ')';
      break;
    case Expression::Kind::binary: {
      int p = precedence(e);
      // Left-associative: the right operand needs parentheses at equal precedence.
      print_operand(e.operands[0], p, out);
      out += ' ';
      out += static_cast<char>(e.op);
      out += ' ';
      print_operand(e.operands[1], p + 1, out);
      break;
    }
    case Expression::Kind::negate:
      out += '-';
      print_operand(e.operands[0], 3, out);
      break;
  }
}

void collect_refs(const Expression& e, std::vector<const Expression*>& out) {
  if (e.kind == Expression::Kind::member_ref) {
    out.push_back(&e);
    return;
  }
  for (const auto& child : e.operands) collect_refs(child, out);
}

}  // namespace

std::optional<Function> find_function(std::string_view name) {
  auto key = upper(name);
  for (const auto& entry : kFunctions) {
    if (entry.name == key) return entry.function;
  }
  return std::nullopt;
}

std::string_view function_name(Function f) noexcept {
  for (const auto& entry : kFunctions) {
    if (entry.function == f) return entry.name;
  }
  return "?";
}

Expression Expression::literal(double v) {
  Expression e;
  e.kind = Kind::number;
  e.number = v;
  return e;
}

Expression Expression::ref(std::string member, std::vector<MemberOverride> overrides) {
  Expression e;
  e.kind = Kind::member_ref;
  e.name = std::move(member);
  e.overrides = std::move(overrides);
  return e;
}

Expression Expression::call(std::string function, std::vector<Expression> args) {
  Expression e;
  e.kind = Kind::call;
  e.name = upper(function);
  e.operands = std::move(args);
  return e;
}

Expression Expression::binary(BinaryOp op, Expression lhs, Expression rhs) {
  Expression e;
  e.kind = Kind::binary;
  e.op = op;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

Expression Expression::negate(Expression child) {
  Expression e;
  e.kind = Kind::negate;
  e.operands.push_back(std::move(child));
  return e;
}

Expression parse_formula(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Expression& e) {
  std::string out;
  print(e, out);
  return out;
}

std::vector<const Expression*> member_refs(const Expression& e) {
  std::vector<const Expression*> out;
  collect_refs(e, out);
  return out;
}

}  // namespace pivotmodel
