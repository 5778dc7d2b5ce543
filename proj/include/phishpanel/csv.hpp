// Small CSV reader/writer. Handles double-quoted fields with "" escapes,
// skips '#' comment lines (our own output files carry a '#' metadata header
// block), and reports 1-based line numbers in parse errors.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace phishpanel {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Original file line number for each row, for error messages.
  std::vector<std::size_t> line_numbers;
  // '#'-prefixed lines seen before the header, without the leading '#'.
  std::vector<std::string> comments;

  int column(const std::string& name) const;        // -1 when absent
  int require_column(const std::string& name) const; // throws ParseError
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace phishpanel
