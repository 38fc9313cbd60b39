#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "psmlab/errors.hpp"

namespace psmlab::csv {

// Shortest round-trip decimal representation (std::to_chars); deterministic,
// so repeated runs produce byte-identical files.
std::string format_double(double value);

// Minimal strict CSV writer: comma-separated, '\n' line endings, no quoting
// (fields must not contain commas or newlines).
class Writer {
 public:
  explicit Writer(const std::string& path);
  ~Writer();

  void header(const std::string& line);
  void field(const std::string& value);
  void field(double value);
  void field(long long value);
  void end_row();

 private:
  std::ofstream out_;
  std::string path_;
  bool row_open_ = false;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // ParseError when missing
};

// Reads a comma-separated file written by Writer (or any unquoted CSV).
// Every row must have as many fields as the header. Throws IoError when the
// file cannot be opened and ParseError on ragged rows.
Table read_table(const std::string& path);

double parse_field_double(const std::string& value, const std::string& context);

}  // namespace psmlab::csv
