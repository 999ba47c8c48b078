#include "semilat/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace semilat {

std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

void CsvTable::add_row(const std::vector<double>& row) {
  lines_.push_back(Line{false, {}, row});
}

void CsvTable::add_section(std::vector<std::string> header) {
  lines_.push_back(Line{true, std::move(header), {}});
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  auto emit_header = [&](const std::vector<std::string>& h) {
    for (size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
    out << "\n";
  };
  emit_header(header_);
  for (const auto& line : lines_) {
    if (line.is_header) {
      emit_header(line.header);
    } else {
      for (size_t i = 0; i < line.row.size(); ++i)
        out << (i ? "," : "") << format_sci(line.row[i]);
      out << "\n";
    }
  }
  return out.str();
}

void CsvTable::write(const std::string& path) const { write_text_file(path, to_string()); }

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace semilat
