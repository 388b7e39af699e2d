#include "pivotmodel/cell_value.hpp"

#include <charconv>
#include <string>

namespace pivotmodel {

std::string_view error_text(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::div0: return "#DIV/0!";
    case ErrorKind::ref: return "#REF!";
    case ErrorKind::fn: return "#NAME?";
  }
  return "#ERR!";
}

std::optional<ErrorKind> parse_error_text(std::string_view text) noexcept {
  for (auto kind : {ErrorKind::div0, ErrorKind::ref, ErrorKind::fn}) {
    if (text == error_text(kind)) return kind;
  }
  return std::nullopt;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

std::string format_value(CellValue v) {
  if (v.is_error()) return std::string(error_text(v.error()));
  return format_number(v.number());
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// "12,345,678.9" -> "12345678.9"; empty result on a malformed grouping.
std::string strip_grouping(std::string_view s) {
  std::string out;
  std::size_t start = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  auto dot = s.find('.');
  std::string_view integral = s.substr(start, dot == std::string_view::npos ? s.npos : dot - start);
  std::size_t group = 0;
  bool first = true;
  for (std::size_t i = 0; i <= integral.size(); ++i) {
    if (i == integral.size() || integral[i] == ',') {
      if ((first && (group == 0 || group > 3)) || (!first && group != 3)) return {};
      first = false;
      group = 0;
      continue;
    }
    ++group;
  }
  out.append(s.substr(0, start));
  for (char c : integral) {
    if (c != ',') out.push_back(c);
  }
  if (dot != std::string_view::npos) out.append(s.substr(dot));
  return out;
}

}  // namespace

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  std::string grouped;
  if (text.find(',') != std::string_view::npos) {
    grouped = strip_grouping(text);
    if (grouped.empty()) return std::nullopt;
    text = grouped;
  }
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string_view to_string(ProvenanceKind kind) noexcept {
  switch (kind) {
    case ProvenanceKind::empty: return "EMPTY";
    case ProvenanceKind::data: return "DATA";
    case ProvenanceKind::rule: return "RULE";
    case ProvenanceKind::override_pin: return "OVERRIDE";
  }
  return "EMPTY";
}

}  // namespace pivotmodel
