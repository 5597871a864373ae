#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ssq {

// Flat key=value settings. Files may hold blank lines and '#' comments;
// whitespace around keys and values is trimmed. Later set() calls override
// earlier values, which is how command-line flags beat file entries.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<std::string> get_str_list(const std::string& key,
                                        const std::vector<std::string>& fallback) const;

  // Sorted key=value lines.
  std::string serialize() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace ssq
