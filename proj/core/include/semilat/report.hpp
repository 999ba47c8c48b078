#pragma once

#include <string>
#include <vector>

#include "semilat/errors.hpp"

namespace semilat {

/// Deterministic CSV table: header row plus full-precision scientific rows.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(const std::vector<double>& row);
  /// Second header mid-file (section break, used by the heat report).
  void add_section(std::vector<std::string> header);

  std::string to_string() const;
  void write(const std::string& path) const;

private:
  struct Line {
    bool is_header;
    std::vector<std::string> header;
    std::vector<double> row;
  };
  std::vector<std::string> header_;
  std::vector<Line> lines_;
};

std::string format_sci(double v);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace semilat
