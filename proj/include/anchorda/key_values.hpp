#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace anchorda {

// Flat `key = value` text. Blank lines and lines starting with '#' are
// ignored; keys are unique.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text, const std::string& origin = "<text>");
  static KeyValues read(const std::filesystem::path& path);

  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& get(const std::string& key) const;

  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Throws a configuration error naming the first key not in `allowed`.
  void reject_unknown(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string to_string() const;

 private:
  std::map<std::string, std::string> entries_;
};

double parse_double(const std::string& s, const std::string& what);
long long parse_int(const std::string& s, const std::string& what);
std::vector<std::string> split_list(const std::string& s, char sep = ',');
std::vector<double> parse_double_list(const std::string& s, const std::string& what);
std::string trim(const std::string& s);

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

}  // namespace anchorda
