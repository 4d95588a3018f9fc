#pragma once

#include "hdpower/data_matrix.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hdpower {

/// Comma-separated reals, one observation per row, every row the same width.
/// Blank lines are skipped. Errors carry "source:line:column" positions.
DataMatrix parse_data_csv(std::string_view text, const std::string& source, bool header = false);
DataMatrix read_data_csv(const std::filesystem::path& path, bool header = false);

/// Shortest round-trip representation, so parse(format(X)) == X.
std::string format_data_csv(const DataMatrix& data);

std::string read_text_file(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

/// Flat "key = value" text with [section] headers; '#' and ';' start comments.
struct IniEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct IniSection {
  std::string name;
  int line = 0;
  std::vector<IniEntry> entries;
};

struct IniDocument {
  std::string source;
  std::vector<IniSection> sections;

  const IniSection* find(std::string_view name) const;
};

/// Throws ConfigError listing every syntax problem (keys outside a section,
/// missing '=', duplicate sections or keys).
IniDocument parse_ini(std::string_view text, const std::string& source);

}  // namespace hdpower
