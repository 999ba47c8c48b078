#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "semilat/errors.hpp"

namespace semilat {

/// Flat dotted-key configuration: one `key = value` per line, `#` comments.
/// Values are numbers, bare strings, lists `[1, 2, 3]` or row-list matrices
/// `[[1, 2], [3, 4]]`.
class Config {
public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;
  Eigen::MatrixXd require_matrix(const std::string& key) const;

  /// Overrides an entry (CLI flags take precedence over the file).
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }

  const std::map<std::string, std::string>& entries() const { return entries_; }

private:
  std::map<std::string, std::string> entries_;
};

}  // namespace semilat
