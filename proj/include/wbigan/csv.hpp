#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace wbigan {

// Plain comma-separated table (no quoting; fields never contain commas).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws DomainError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

std::vector<std::string> split_fields(std::string_view line, char sep = ',');

CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Shortest text that reads back to the same double ("%.17g").
std::string format_double(double v);
// Throws DomainError on anything but a complete finite number.
double parse_double(std::string_view text);
std::size_t parse_size(std::string_view text);

}  // namespace wbigan
