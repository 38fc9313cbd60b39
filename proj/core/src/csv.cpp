#include "psmlab/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace psmlab::csv {

std::string format_double(double value) {
  char buffer[64];
  // Fixed notation over the common magnitude range (0.0002 rather than
  // 2e-04), shortest-round-trip general form elsewhere.
  const double magnitude = std::fabs(value);
  const bool fixed =
      std::isfinite(value) && magnitude != 0.0 && magnitude >= 1e-5 &&
      magnitude < 1e16;
  const auto result =
      fixed ? std::to_chars(buffer, buffer + sizeof(buffer), value,
                            std::chars_format::fixed)
            : std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

Writer::Writer(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw IoError("cannot open '" + path + "' for writing");
}

Writer::~Writer() = default;

void Writer::header(const std::string& line) { out_ << line << '\n'; }

void Writer::field(const std::string& value) {
  if (row_open_) out_ << ',';
  out_ << value;
  row_open_ = true;
}

void Writer::field(double value) { field(format_double(value)); }

void Writer::field(long long value) { field(std::to_string(value)); }

void Writer::end_row() {
  out_ << '\n';
  row_open_ = false;
  if (!out_) throw IoError("write failure on '" + path_ + "'");
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw ParseError("column '" + name + "' not found in CSV header");
}

namespace {
std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}
}  // namespace

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  Table table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_row(line);
    if (line_no == 1) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw ParseError(path + ": missing header row");
  return table;
}

double parse_field_double(const std::string& value, const std::string& context) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ParseError(context + ": cannot parse '" + value + "' as a number");
  }
}

}  // namespace psmlab::csv
