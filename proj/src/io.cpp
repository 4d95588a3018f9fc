#include "hdpower/io.hpp"

#include "hdpower/error.hpp"
#include "hdpower/format.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace hdpower {

namespace {

std::string position(const std::string& source, int line, int column) {
  return source + ":" + std::to_string(line) + ":" + std::to_string(column);
}

}  // namespace

DataMatrix parse_data_csv(std::string_view text, const std::string& source, bool header) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  int line_no = 0;
  bool skipped_header = !header;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    Index count = 0;
    std::size_t field_start = 0;
    while (true) {
      std::size_t comma = line.find(',', field_start);
      const std::size_t field_end = comma == std::string_view::npos ? line.size() : comma;
      const std::string_view field = line.substr(field_start, field_end - field_start);
      const int column = static_cast<int>(field_start) + 1;
      const std::string_view cell = trim(field);
      if (cell.empty()) {
        throw InputError(position(source, line_no, column) + ": empty field");
      }
      double v = 0.0;
      try {
        v = parse_double(cell, "value");
      } catch (const InputError&) {
        throw InputError(position(source, line_no, column) + ": not a number: '" +
                         std::string(cell) + "'");
      }
      if (!std::isfinite(v)) {
        throw InputError(position(source, line_no, column) + ": non-finite value '" +
                         std::string(cell) + "'");
      }
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      field_start = comma + 1;
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      throw InputError(position(source, line_no, 1) + ": expected " + std::to_string(cols) +
                       " fields, found " + std::to_string(count));
    }
    ++rows;
    if (end == text.size()) break;
  }
  if (rows == 0) throw InputError(source + ": no data rows");
  RowMatrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return DataMatrix(std::move(m));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

DataMatrix read_data_csv(const std::filesystem::path& path, bool header) {
  return parse_data_csv(read_text_file(path), path.string(), header);
}

std::string format_data_csv(const DataMatrix& data) {
  std::string out;
  for (Index i = 0; i < data.n(); ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  return out;
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move output into place at '" + path.string() + "'");
  }
}

const IniSection* IniDocument::find(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

IniDocument parse_ini(std::string_view text, const std::string& source) {
  IniDocument doc;
  doc.source = source;
  std::vector<std::string> errors;
  std::set<std::string> section_names;
  std::set<std::string> keys;
  int line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "unterminated section header");
        continue;
      }
      std::string name(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) errors.push_back(where + "empty section name");
      if (!section_names.insert(name).second) errors.push_back(where + "duplicate section [" + name + "]");
      doc.sections.push_back({name, line_no, {}});
      keys.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    if (doc.sections.empty()) {
      errors.push_back(where + "key outside of any [section]");
      continue;
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      errors.push_back(where + "empty key");
      continue;
    }
    if (!keys.insert(key).second) {
      errors.push_back(where + "duplicate key '" + key + "' in [" + doc.sections.back().name + "]");
      continue;
    }
    doc.sections.back().entries.push_back({std::move(key), std::move(value), line_no});
  }
  if (!errors.empty()) {
    std::string message = source + " has syntax errors:";
    for (const auto& e : errors) message += "\n  - " + e;
    throw ConfigError(message);
  }
  return doc;
}

}  // namespace hdpower
