#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace improvkit {

// Flat "key = value" documents. '#' starts a comment; blank lines ignored.
// Lists are comma-separated. Used for schemas, training configs and reports.
class KvConfig {
public:
  static KvConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KvConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::string origin() const { return origin_; }

  // Keys in insertion-independent (sorted) order, one per line.
  std::string dump() const;

private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

std::string trim(const std::string& s);
std::vector<std::string> split_list(const std::string& s, char sep = ',');
double parse_double(const std::string& s, const std::string& what);
long long parse_int(const std::string& s, const std::string& what);
// Shortest text that reads back to the identical double.
std::string format_double(double v);

}  // namespace improvkit
