#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ebm {

/// Streaming reader for comma-separated records with RFC 4180 quoting.
/// Quoted fields may contain commas, doubled quotes and line breaks.
/// CRLF and LF line endings are accepted; a leading UTF-8 BOM is skipped.
/// Blank lines are ignored.
class CsvReader {
public:
   explicit CsvReader(std::istream & in);

   /// Reads the next record into `fields`. Returns false at end of input.
   bool next(std::vector<std::string> & fields);

   /// 1-based line number where the most recently returned record started.
   std::size_t line() const noexcept { return m_recordLine; }

private:
   std::istream & m_in;
   std::size_t m_line = 1;
   std::size_t m_recordLine = 0;
   bool m_first = true;
};

/// Quotes a field when it contains a delimiter, quote, line break or edge whitespace.
std::string csv_escape(std::string_view field);

/// Joins fields into one record line (no terminator).
std::string csv_join(const std::vector<std::string> & fields);

} // namespace ebm
