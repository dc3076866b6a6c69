#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace simsel::csv {

using Row = std::vector<std::string>;

/// A parsed CSV file. Lines starting with '#' before the header are kept in
/// `comments` (without the marker); blank lines are skipped.
struct Table
{
  std::vector<std::string> comments;
  Row header;
  std::vector<Row> rows;
  std::vector<std::size_t> line_numbers; // 1-based source line of each row

  // Index of `name` in the header, or -1.
  int column(std::string_view name) const;
};

// RFC 4180 style: fields containing a comma, quote or newline are quoted.
Table parse(std::string_view text);
Table read_file(const std::string& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace simsel::csv
