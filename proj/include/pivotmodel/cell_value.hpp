#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pivotmodel {

enum class ErrorKind : std::uint8_t { div0 = 1, ref = 2, fn = 3 };

// A cell holds either a finite double or a spreadsheet-style error. Errors are
// stored as quiet NaNs carrying the kind in the payload, so a cell is exactly
// eight bytes and two cells are identical iff their bit patterns match.
class CellValue {
 public:
  constexpr CellValue() noexcept = default;

  // Non-finite inputs become Error(DIV0).
  static CellValue number(double v) noexcept {
    CellValue c;
    if (std::isfinite(v)) {
      c.raw_ = v;
    } else {
      c.raw_ = std::bit_cast<double>(kErrorBits | static_cast<std::uint64_t>(ErrorKind::div0));
    }
    return c;
  }

  static CellValue error(ErrorKind kind) noexcept {
    CellValue c;
    c.raw_ = std::bit_cast<double>(kErrorBits | static_cast<std::uint64_t>(kind));
    return c;
  }

  bool is_error() const noexcept { return std::isnan(raw_); }
  bool is_number() const noexcept { return !is_error(); }

  // Precondition: is_number().
  double number() const noexcept { return raw_; }

  // Precondition: is_error().
  ErrorKind error() const noexcept {
    return static_cast<ErrorKind>(std::bit_cast<std::uint64_t>(raw_) & 0xff);
  }

  std::uint64_t bits() const noexcept { return std::bit_cast<std::uint64_t>(raw_); }

  friend bool operator==(CellValue a, CellValue b) noexcept { return a.bits() == b.bits(); }

 private:
  static constexpr std::uint64_t kErrorBits = 0x7ff8'0000'0000'0000ULL;
  double raw_ = 0.0;
};

// Excel spellings: #DIV/0!, #REF!, #NAME?
std::string_view error_text(ErrorKind kind) noexcept;
std::optional<ErrorKind> parse_error_text(std::string_view text) noexcept;

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

// Number or error spelling.
std::string format_value(CellValue v);

// Accepts plain decimals, exponents, and thousands-grouped values such as
// "6,602.56". Returns nullopt for anything else, including non-finite text.
std::optional<double> parse_number(std::string_view text);

enum class ProvenanceKind : std::uint8_t { empty, data, rule, override_pin };

// `ref` is the cube's source-table index for data and override cells, and the
// 1-based rule sequence for rule cells.
struct Provenance {
  ProvenanceKind kind = ProvenanceKind::empty;
  std::uint32_t ref = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

std::string_view to_string(ProvenanceKind kind) noexcept;

}  // namespace pivotmodel
