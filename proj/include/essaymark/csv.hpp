#ifndef ESSAYMARK_CSV_HPP
#define ESSAYMARK_CSV_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace essaymark::csv {

using Row = std::vector<std::string>;

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(std::size_t line_, const std::string& what_)
      : std::runtime_error("csv line " + std::to_string(line_) + ": " + what_),
        line(line_) {}
};

// RFC 4180 reader: quoted fields, embedded quotes, newlines inside quotes,
// CRLF or LF line endings.
std::vector<Row> parse(std::istream& in);
std::vector<Row> parse_string(const std::string& s);
std::vector<Row> parse_file(const std::string& path);

std::string escape_field(const std::string& field);
void write_row(std::ostream& out, const Row& row);

}  // namespace essaymark::csv

#endif
