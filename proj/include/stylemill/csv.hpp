#pragma once

#include <istream>
#include <string>
#include <vector>

namespace stylemill {

// Minimal RFC-4180-style CSV: quoted fields may contain commas, doubled
// quotes, and embedded newlines. CRLF and LF line endings both accepted.
class CsvReader {
  public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Reads one record into `fields`; returns false on clean EOF.
    // Throws DataError on an unterminated quoted field.
    bool next(std::vector<std::string>& fields);

    // 1-based line number where the last record started.
    std::size_t record_line() const { return record_line_; }

  private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

std::string csv_quote(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

} // namespace stylemill
