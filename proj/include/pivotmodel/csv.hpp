#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pivotmodel {

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180: comma separated, double-quoted fields may contain commas, quotes
// ("") and line breaks; CRLF or LF line endings; a UTF-8 BOM is skipped.
// Blank lines are dropped.
std::vector<CsvRecord> parse_csv(std::string_view text);

class CsvWriter {
 public:
  CsvWriter& field(std::string_view value);
  CsvWriter& end_row();
  // Writes an empty line, used to separate blocks.
  CsvWriter& blank_row();

  const std::string& str() const noexcept { return out_; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
  bool row_started_ = false;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace pivotmodel
