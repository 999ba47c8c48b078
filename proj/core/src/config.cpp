#include "semilat/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace semilat {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& key, const std::string& text) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  }
}

std::vector<std::string> split_top_level(const std::string& key, const std::string& body) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char ch : body) {
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (depth < 0) throw ConfigError("config key '" + key + "': unbalanced brackets");
    if (ch == ',' && depth == 0) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (depth != 0) throw ConfigError("config key '" + key + "': unbalanced brackets");
  if (!trim(cur).empty() || !parts.empty()) parts.push_back(trim(cur));
  return parts;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    cfg.entries_[key] = value;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::string Config::require_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config key '" + key + "' is required");
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_number(key, it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, fallback);
  const int i = static_cast<int>(v);
  if (v != static_cast<double>(i))
    throw ConfigError("config key '" + key + "': expected an integer");
  return i;
}

std::vector<double> Config::get_list(const std::string& key,
                                     std::vector<double> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::string text = trim(it->second);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']')
    throw ConfigError("config key '" + key + "': expected a [list]");
  std::vector<double> out;
  for (const auto& part : split_top_level(key, text.substr(1, text.size() - 2)))
    out.push_back(parse_number(key, part));
  return out;
}

Eigen::MatrixXd Config::require_matrix(const std::string& key) const {
  const std::string text = trim(require_string(key));
  if (text.size() < 4 || text.front() != '[' || text.back() != ']')
    throw ConfigError("config key '" + key + "': expected [[row], [row], ...]");
  std::vector<std::vector<double>> rows;
  for (const auto& row_text : split_top_level(key, text.substr(1, text.size() - 2))) {
    if (row_text.size() < 2 || row_text.front() != '[' || row_text.back() != ']')
      throw ConfigError("config key '" + key + "': matrix rows must be [..]");
    std::vector<double> row;
    for (const auto& part : split_top_level(key, row_text.substr(1, row_text.size() - 2)))
      row.push_back(parse_number(key, part));
    if (!rows.empty() && rows.front().size() != row.size())
      throw ConfigError("config key '" + key + "': ragged matrix rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty())
    throw ConfigError("config key '" + key + "': empty matrix");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace semilat
