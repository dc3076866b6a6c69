#include "simsel/csv.hpp"

#include "simsel/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace simsel::csv {

int Table::column(std::string_view name) const
{
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name)
      return static_cast<int>(i);
  }
  return -1;
}

namespace {

// Parses one record starting at `pos`; advances `pos` past the terminator.
// `line` is incremented for every newline consumed.
Row parse_record(std::string_view text, std::size_t& pos, std::size_t& line)
{
  Row row;
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  while (pos < text.size()) {
    const char ch = text[pos];
    if (in_quotes) {
      if (ch == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        in_quotes = false;
        ++pos;
        continue;
      }
      if (ch == '\n')
        ++line;
      field.push_back(ch);
      ++pos;
      continue;
    }
    if (ch == '"' && field.empty() && !quoted) {
      in_quotes = true;
      quoted = true;
      ++pos;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      quoted = false;
      ++pos;
    } else if (ch == '\r') {
      ++pos;
    } else if (ch == '\n') {
      ++pos;
      ++line;
      row.push_back(std::move(field));
      return row;
    } else {
      field.push_back(ch);
      ++pos;
    }
  }
  if (in_quotes)
    fail(ErrorKind::Format, "unterminated quoted field at line " + std::to_string(line));
  row.push_back(std::move(field));
  return row;
}

bool is_blank(std::string_view text, std::size_t pos)
{
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r'))
    ++pos;
  return pos >= text.size() || text[pos] == '\n';
}

void skip_line(std::string_view text, std::size_t& pos)
{
  while (pos < text.size() && text[pos] != '\n')
    ++pos;
  if (pos < text.size())
    ++pos;
}

} // namespace

Table parse(std::string_view text)
{
  Table table;
  std::size_t pos = 0;
  std::size_t line = 1;
  if (text.substr(0, 3) == "\xEF\xBB\xBF")
    pos = 3;
  bool have_header = false;
  while (pos < text.size()) {
    if (is_blank(text, pos)) {
      skip_line(text, pos);
      ++line;
      continue;
    }
    if (!have_header && text[pos] == '#') {
      const std::size_t start = pos + 1;
      skip_line(text, pos);
      std::string_view comment = text.substr(start, pos - start);
      while (!comment.empty() && (comment.back() == '\n' || comment.back() == '\r'))
        comment.remove_suffix(1);
      table.comments.emplace_back(comment);
      ++line;
      continue;
    }
    const std::size_t record_line = line;
    Row row = parse_record(text, pos, line);
    if (!have_header) {
      table.header = std::move(row);
      have_header = true;
    } else {
      table.rows.push_back(std::move(row));
      table.line_numbers.push_back(record_line);
    }
  }
  return table;
}

std::string read_text_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out)
    fail(ErrorKind::Io, "write failed for '" + path + "'");
}

Table read_file(const std::string& path)
{
  return parse(read_text_file(path));
}

std::string escape(std::string_view field)
{
  if (field.find_first_of(",\"\n\r") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"')
      out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row)
{
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i)
      out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

std::string format_double(double value)
{
  if (!std::isfinite(value))
    fail(ErrorKind::Numerical, "cannot serialize non-finite value");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view text)
{
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
    text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  return text;
}

} // namespace

double parse_double(std::string_view text)
{
  text = trim(text);
  if (!text.empty() && text.front() == '+')
    text.remove_prefix(1);
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    fail(ErrorKind::Format, "not a number: '" + std::string(text) + "'");
  return value;
}

std::int64_t parse_int(std::string_view text)
{
  text = trim(text);
  std::int64_t value = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    fail(ErrorKind::Format, "not an integer: '" + std::string(text) + "'");
  return value;
}

} // namespace simsel::csv
